//! Temporal-observable trajectories on a time grid, truncation sweeps, and
//! the trajectory feature matrix exchanged with the regression stage.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::reduction::max_expectation_drift;
use crate::sim::{apply_circuit, exact_evolve, expectation, StateVector};
use crate::synthesis::{trotter_circuit, SynthesisConfig, SynthesisMethod};

/// Uniform grid `0, dt, 2 dt, ..., <= t_end` in atomic time units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {dt}")));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::config(format!("t_end must be non-negative, got {t_end}")));
        }
        Ok(TimeGrid { t_end, dt })
    }

    pub fn len(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn t_max(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Trotter { steps: usize, method: SynthesisMethod },
}

/// `⟨obs⟩(t)` for every grid point, starting from `init |0...0⟩`.
///
/// The `t = 0` value is the initial-state expectation for every engine.
/// Identity terms of `obs` contribute their coefficient directly, so an
/// energy trajectory carries the Hamiltonian's constant offset.
pub fn trajectory(
    h: &PauliSum,
    obs: &PauliSum,
    init: &Circuit,
    grid: &TimeGrid,
    engine: Engine,
) -> Result<Vec<(f64, f64)>> {
    let n = h.num_qubits();
    for (what, m) in [("observable", obs.num_qubits()), ("initial circuit", init.num_qubits())] {
        if m != n {
            return Err(Error::input(format!("{what} acts on {m} qubits, Hamiltonian on {n}")));
        }
    }
    if let Engine::Trotter { steps, method } = engine {
        SynthesisConfig::new(steps, grid.t_max(), method)?;
    }
    let psi0 = apply_circuit(init, &StateVector::zero(n)?)?;
    let at_zero = expectation(obs, &psi0)?;
    grid.points()
        .into_par_iter()
        .map(|t| {
            if t == 0.0 {
                return Ok((t, at_zero));
            }
            let value = match engine {
                Engine::Exact => expectation(obs, &exact_evolve(h, t, &psi0)?)?,
                Engine::Trotter { steps, method } => {
                    let cfg = SynthesisConfig::new(steps, t, method)?;
                    let prog = trotter_circuit(init, h, std::slice::from_ref(obs), &cfg)?;
                    let psi = apply_circuit(&prog.circuit, &StateVector::zero(n)?)?;
                    expectation(&prog.transformed_observables[0], &psi)?
                }
            };
            Ok((t, value))
        })
        .collect()
}

/// Mean absolute difference of two equally sampled trajectories.
pub fn mean_absolute_error(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::input(format!("trajectories have {} and {} points", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x.1 - y.1).abs()).sum::<f64>() / a.len() as f64)
}

/// Terms kept at `fraction` percent: identity terms first, then by
/// decreasing `|c|` (stable), `ceil(fraction K / 100)` in total.
pub fn top_terms(h: &PauliSum, fraction: f64) -> Result<PauliSum> {
    if !(fraction > 0.0 && fraction <= 100.0) {
        return Err(Error::config(format!("kept fraction must lie in (0, 100], got {fraction}")));
    }
    let k = ((fraction * h.len() as f64 / 100.0) - 1e-9).ceil().max(0.0) as usize;
    if k >= h.len() {
        return Ok(h.clone());
    }
    let mut order: Vec<usize> = (0..h.len()).collect();
    let terms = h.terms();
    order.sort_by(|&i, &j| {
        let key = |t: usize| (!terms[t].pauli.is_identity(), -terms[t].coeff.abs());
        key(i).partial_cmp(&key(j)).expect("finite coefficients")
    });
    let mut keep = vec![false; h.len()];
    for &i in &order[..k] {
        keep[i] = true;
    }
    Ok(h.filtered(|i, _| keep[i]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub kept_terms: usize,
    pub removed_weight: f64,
    pub mae: f64,
    /// Largest certified drift over the grid, `2 t_max w ||obs||_1`.
    pub bound: f64,
}

/// Exact-engine trajectory error of top-`fraction` truncations against the
/// full Hamiltonian.
pub fn truncation_sweep(
    h: &PauliSum,
    obs: &PauliSum,
    init: &Circuit,
    grid: &TimeGrid,
    fractions: &[f64],
) -> Result<Vec<SweepRow>> {
    let reference = trajectory(h, obs, init, grid, Engine::Exact)?;
    let obs_norm = obs.one_norm();
    fractions
        .iter()
        .map(|&fraction| {
            let kept = top_terms(h, fraction)?;
            let removed_weight = (h.one_norm() - kept.one_norm()).max(0.0);
            let traj = trajectory(&kept, obs, init, grid, Engine::Exact)?;
            Ok(SweepRow {
                fraction,
                kept_terms: kept.len(),
                removed_weight,
                mae: mean_absolute_error(&traj, &reference)?,
                bound: max_expectation_drift(removed_weight, grid.t_max(), obs_norm),
            })
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::input(e.to_string()))?).expect("csv is utf-8"))
}

/// Feature rows of sampled trajectories, one per molecule, with optional
/// regression targets.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMatrix {
    pub ids: Vec<String>,
    pub times: Vec<f64>,
    pub features: Vec<Vec<f64>>,
    pub targets: Option<Vec<f64>>,
}

impl TrajectoryMatrix {
    pub fn new(ids: Vec<String>, times: Vec<f64>, features: Vec<Vec<f64>>, targets: Option<Vec<f64>>) -> Result<Self> {
        let m = TrajectoryMatrix { ids, times, features, targets };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ids.len() != self.features.len() {
            return Err(Error::input(format!("{} ids for {} feature rows", self.ids.len(), self.features.len())));
        }
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != self.times.len() {
                return Err(Error::input(format!("row {i} has {} values, grid has {}", row.len(), self.times.len())));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::input(format!("row {i} contains non-finite value {v}")));
            }
        }
        if let Some(y) = &self.targets {
            if y.len() != self.features.len() {
                return Err(Error::input(format!("{} targets for {} rows", y.len(), self.features.len())));
            }
            if let Some(v) = y.iter().find(|v| !v.is_finite()) {
                return Err(Error::input(format!("non-finite target {v}")));
            }
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        self.features.len()
    }

    pub fn num_features(&self) -> usize {
        self.times.len()
    }

    pub fn subset(&self, rows: &[usize]) -> TrajectoryMatrix {
        TrajectoryMatrix {
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            times: self.times.clone(),
            features: rows.iter().map(|&i| self.features[i].clone()).collect(),
            targets: self.targets.as_ref().map(|y| rows.iter().map(|&i| y[i]).collect()),
        }
    }

    /// Header `id,t=0.0,t=0.5,...[,target]`.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(self.times.iter().map(|t| format!("t={t:?}")));
        if self.targets.is_some() {
            header.push("target".into());
        }
        w.write_record(&header)?;
        for (i, row) in self.features.iter().enumerate() {
            let mut rec = vec![self.ids[i].clone()];
            rec.extend(row.iter().map(|v| format!("{v:?}")));
            if let Some(y) = &self.targets {
                rec.push(format!("{:?}", y[i]));
            }
            w.write_record(&rec)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::input(e.to_string()))?).expect("csv is utf-8"))
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.first() != Some(&"id") {
            return Err(Error::input("line 1: first column must be \"id\""));
        }
        let has_target = cols.last() == Some(&"target");
        let time_cols = &cols[1..cols.len() - usize::from(has_target)];
        let times = time_cols
            .iter()
            .map(|c| {
                c.strip_prefix("t=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::input(format!("line 1: bad time column {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ids = Vec::new();
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec?;
            if rec.len() != cols.len() {
                return Err(Error::input(format!("line {line}: expected {} fields, found {}", cols.len(), rec.len())));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::input(format!("line {line}: bad number {s:?}")));
            ids.push(rec[0].to_string());
            features.push((1..=times.len()).map(|j| parse(&rec[j])).collect::<Result<Vec<_>>>()?);
            if has_target {
                targets.push(parse(&rec[cols.len() - 1])?);
            }
        }
        TrajectoryMatrix::new(ids, times, features, has_target.then_some(targets))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_csv_str(&text).map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{truncate, truncation_threshold, TruncationConfig};
    use crate::synthetic::random_hamiltonian;
    use proptest::prelude::*;

    #[test]
    fn grid_sizes() {
        let g = TimeGrid::new(14.0, 0.5).unwrap();
        assert_eq!(g.len(), 29);
        assert_eq!(g.points()[28], 14.0);
        assert_eq!(TimeGrid::new(0.0, 0.5).unwrap().points(), vec![0.0]);
        assert_eq!(TimeGrid::new(1.0, 0.3).unwrap().len(), 4);
        assert!(TimeGrid::new(1.0, 0.0).is_err());
    }

    #[test]
    fn rabi_trajectory_matches_closed_form() {
        let c = 0.3;
        let h = PauliSum::from_labels(1, &[("X", c)]).unwrap();
        let z = PauliSum::from_labels(1, &[("Z", 1.0)]).unwrap();
        let g = TimeGrid::new(5.0, 0.5).unwrap();
        for engine in [
            Engine::Exact,
            Engine::Trotter { steps: 1, method: SynthesisMethod::Default },
            Engine::Trotter { steps: 2, method: SynthesisMethod::Cdat },
            Engine::Trotter { steps: 1, method: SynthesisMethod::Greedy },
        ] {
            for (t, v) in trajectory(&h, &z, &Circuit::new(1), &g, engine).unwrap() {
                assert!((v - (2.0 * c * t).cos()).abs() < 1e-10, "{engine:?} {t}");
            }
        }
    }

    #[test]
    fn zero_grid_is_initial_expectation() {
        let h = random_hamiltonian(3, 8, 1);
        let obs = random_hamiltonian(3, 4, 2);
        let init = Circuit::from_gates(3, [crate::circuit::Gate::H(0)]).unwrap();
        let psi = apply_circuit(&init, &StateVector::zero(3).unwrap()).unwrap();
        let want = expectation(&obs, &psi).unwrap();
        let g = TimeGrid::new(0.0, 1.0).unwrap();
        for engine in [Engine::Exact, Engine::Trotter { steps: 3, method: SynthesisMethod::Greedy }] {
            assert_eq!(trajectory(&h, &obs, &init, &g, engine).unwrap(), vec![(0.0, want)]);
        }
    }

    #[test]
    fn full_fraction_has_zero_error_and_threshold_fraction_is_bounded() {
        let h = random_hamiltonian(4, 24, 9);
        let obs = h.clone();
        let init = Circuit::new(4);
        let grid = TimeGrid::new(14.0, 0.5).unwrap();
        let cfg = TruncationConfig::new(0.01, 14.0).unwrap();
        let kept = truncate(&h, &cfg);
        let frac = 100.0 * kept.kept.len() as f64 / h.len() as f64;
        let rows = truncation_sweep(&h, &obs, &init, &grid, &[frac, 100.0]).unwrap();
        assert_eq!(rows[1].mae, 0.0);
        assert_eq!(rows[0].kept_terms, kept.kept.len());
        assert!((rows[0].removed_weight - kept.removed_weight).abs() < 1e-12);
        assert!(rows[0].mae <= rows[0].bound, "{rows:?}");
        assert!(truncation_threshold(&cfg) > 0.0);
    }

    #[test]
    fn top_terms_keeps_identity_and_largest() {
        let h = PauliSum::from_labels(2, &[("ZI", 0.1), ("II", 0.01), ("XX", -0.5), ("IZ", 0.2)]).unwrap();
        let k = top_terms(&h, 50.0).unwrap();
        let labels: Vec<String> = k.iter().map(|t| t.pauli.letters()).collect();
        assert_eq!(labels, vec!["II", "XX"]);
        assert!(top_terms(&h, 0.0).is_err());
        assert_eq!(top_terms(&h, 100.0).unwrap(), h);
    }

    proptest! {
        #[test]
        fn kept_sets_are_nested(seed in 0u64..500, a in 1.0f64..100.0, b in 1.0f64..100.0) {
            let h = random_hamiltonian(4, 20, seed);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let small = top_terms(&h, lo).unwrap();
            let large = top_terms(&h, hi).unwrap();
            for t in small.iter() {
                prop_assert!(large.iter().any(|u| u.pauli == t.pauli));
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let m = TrajectoryMatrix::new(
            vec!["a".into(), "b".into()],
            vec![0.0, 0.5, 1.0],
            vec![vec![1.0, -0.25, 1e-9], vec![0.1, 0.2, 0.30000000000000004]],
            Some(vec![3.5, -1.0]),
        )
        .unwrap();
        let text = m.to_csv_string().unwrap();
        assert!(text.starts_with("id,t=0.0,t=0.5,t=1.0,target\n"));
        assert_eq!(TrajectoryMatrix::from_csv_str(&text).unwrap(), m);
        let bare = TrajectoryMatrix { targets: None, ..m };
        assert_eq!(TrajectoryMatrix::from_csv_str(&bare.to_csv_string().unwrap()).unwrap(), bare);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = TrajectoryMatrix::from_csv_str("id,t=0.0,target\nx,1.0,2.0\ny,oops,1.0\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(TrajectoryMatrix::from_csv_str("name,t=0.0\n").is_err());
    }
}
