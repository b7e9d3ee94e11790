//! Seeded synthetic inputs: Hamiltonian families with coefficient spectra
//! spanning 1e-1..1e-7, regression datasets with known structure, and a
//! small trajectory-plus-target dataset for exercising the full pipeline.

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, Gate};
use crate::error::Result;
use crate::pauli::{PauliString, PauliSum};
use crate::pipeline::{trajectory, Engine, TimeGrid, TrajectoryMatrix};

fn random_word(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    let letters: String = (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)]).collect();
    PauliString::parse(&letters, n).expect("valid letters")
}

/// `num_terms` distinct non-identity words (capped at `4^n - 1`) with
/// random signs and log-uniform magnitudes in `[1e-7, 1e-1]`.
pub fn random_hamiltonian(num_qubits: usize, num_terms: usize, seed: u64) -> PauliSum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = 4usize.saturating_pow(num_qubits as u32).saturating_sub(1);
    let mut words = IndexSet::new();
    while words.len() < num_terms.min(cap) {
        let w = random_word(num_qubits, &mut rng);
        if !w.is_identity() {
            words.insert(w);
        }
    }
    let mut h = PauliSum::new(num_qubits);
    for w in words {
        let mag = 10f64.powf(rng.gen_range(-7.0..=-1.0));
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        h.push(sign * mag, w).expect("Hermitian word");
    }
    h
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn dataset(x: Vec<Vec<f64>>, y: Vec<f64>) -> TrajectoryMatrix {
    let ids = (0..x.len()).map(|i| format!("s{i:03}")).collect();
    let times = (0..x.first().map_or(0, Vec::len)).map(|j| j as f64).collect();
    TrajectoryMatrix::new(ids, times, x, Some(y)).expect("consistent shapes")
}

/// `y = X beta + noise`, with `X` of the given rank.
pub fn linear_dataset(samples: usize, features: usize, rank: usize, noise: f64, seed: u64) -> TrajectoryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix: Vec<Vec<f64>> = (0..rank).map(|_| (0..features).map(|_| normal(&mut rng)).collect()).collect();
    let beta: Vec<f64> = (0..features).map(|_| normal(&mut rng)).collect();
    let mut x = Vec::with_capacity(samples);
    let mut y = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z: Vec<f64> = (0..rank).map(|_| normal(&mut rng)).collect();
        let row: Vec<f64> = (0..features).map(|j| (0..rank).map(|r| z[r] * mix[r][j]).sum::<f64>() + 0.5).collect();
        y.push(row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + noise * normal(&mut rng));
        x.push(row);
    }
    dataset(x, y)
}

/// Two latent factors of unequal strength; the target leans on the weak
/// one, so one component cannot capture it.
pub fn planted_factor_dataset(samples: usize, features: usize, noise: f64, seed: u64) -> TrajectoryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p1: Vec<f64> = (0..features).map(|_| normal(&mut rng)).collect();
    let p2: Vec<f64> = (0..features).map(|_| normal(&mut rng)).collect();
    let mut x = Vec::with_capacity(samples);
    let mut y = Vec::with_capacity(samples);
    for _ in 0..samples {
        let t1 = 3.0 * normal(&mut rng);
        let t2 = normal(&mut rng);
        x.push((0..features).map(|j| t1 * p1[j] + t2 * p2[j] + noise * normal(&mut rng)).collect());
        y.push(0.3 * t1 + t2);
    }
    dataset(x, y)
}

/// Features and targets drawn independently.
pub fn random_target_dataset(samples: usize, features: usize, seed: u64) -> TrajectoryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..samples).map(|_| (0..features).map(|_| normal(&mut rng)).collect()).collect();
    let y = (0..samples).map(|_| normal(&mut rng)).collect();
    dataset(x, y)
}

/// Exact `⟨Σ_q w_q Z_q⟩(t)` trajectories for a family of random
/// Hamiltonians started from `|1..10..0⟩` (half filling). The target is a
/// fixed linear read-out of the trajectory plus Gaussian noise.
pub fn trajectory_dataset(
    molecules: usize,
    num_qubits: usize,
    num_terms: usize,
    grid: &TimeGrid,
    noise: f64,
    seed: u64,
) -> Result<TrajectoryMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obs = PauliSum::new(num_qubits);
    for q in 0..num_qubits {
        let mut letters = vec!['I'; num_qubits];
        letters[q] = 'Z';
        let w: String = letters.into_iter().collect();
        obs.push(-0.5 * (q + 1) as f64, PauliString::parse(&w, num_qubits)?)?;
    }
    let init = Circuit::from_gates(num_qubits, (0..num_qubits / 2).map(Gate::X))?;
    let readout: Vec<f64> = (0..grid.len()).map(|_| normal(&mut rng)).collect();
    let mut ids = Vec::new();
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for m in 0..molecules {
        let mut h = random_hamiltonian(num_qubits, num_terms, rng.gen());
        // lift the strongest couplings to order one so trajectories move
        h = h.scaled(10.0);
        let traj = trajectory(&h, &obs, &init, grid, Engine::Exact)?;
        let row: Vec<f64> = traj.iter().map(|p| p.1).collect();
        let y = row.iter().zip(&readout).map(|(a, b)| a * b).sum::<f64>() / grid.len() as f64;
        targets.push(y + noise * normal(&mut rng));
        ids.push(format!("mol{m:03}"));
        features.push(row);
    }
    TrajectoryMatrix::new(ids, grid.points(), features, Some(targets))
}
