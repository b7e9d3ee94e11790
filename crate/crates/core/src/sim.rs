//! Dense statevector execution and exact time evolution.
//!
//! Basis index bit `q` is the computational value of qubit `q`; bit strings
//! are printed with qubit 0 first.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

/// Largest register `exact_evolve` and `DenseOperator::from_pauli_sum` accept.
pub const DENSE_QUBIT_LIMIT: usize = 12;
/// Largest register `unitary_of` accepts.
pub const UNITARY_QUBIT_LIMIT: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn guard(num_qubits: usize, limit: usize) -> Result<()> {
    if num_qubits > limit {
        return Err(Error::TooManyQubits { num_qubits, limit });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        StateVector::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        guard(num_qubits, 30)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::input(format!("basis index {index} out of range for {num_qubits} qubits")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(StateVector { num_qubits, amps })
    }

    /// Basis state from a 0/1 string, qubit 0 first.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        let mut index = 0usize;
        for (q, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => index |= 1 << q,
                _ => return Err(Error::input(format!("bit string {bits:?} has non-binary character {ch:?}"))),
            }
        }
        StateVector::basis(bits.chars().count(), index)
    }

    /// Takes amplitudes as given; they must already be normalised.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::input(format!("amplitude vector length {dim} is not a power of two")));
        }
        let s = StateVector { num_qubits: dim.trailing_zeros() as usize, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::input(format!("state has norm {norm}, expected 1")));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
            }
        }
        let amps = &mut self.amps;
        let dim = amps.len();
        match *gate {
            Gate::H(q) => {
                let m = 1 << q;
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for i in (0..dim).filter(|i| i & m == 0) {
                    let (a, b) = (amps[i], amps[i | m]);
                    amps[i] = (a + b) * h;
                    amps[i | m] = (a - b) * h;
                }
            }
            Gate::X(q) => {
                let m = 1 << q;
                for i in (0..dim).filter(|i| i & m == 0) {
                    amps.swap(i, i | m);
                }
            }
            Gate::Y(q) => {
                let m = 1 << q;
                for i in (0..dim).filter(|i| i & m == 0) {
                    let (a, b) = (amps[i], amps[i | m]);
                    amps[i] = -I * b;
                    amps[i | m] = I * a;
                }
            }
            Gate::Z(q) => scale_set(amps, 1 << q, -ONE),
            Gate::S(q) => scale_set(amps, 1 << q, I),
            Gate::Sdg(q) => scale_set(amps, 1 << q, -I),
            Gate::Rz(q, phi) => {
                let m = 1 << q;
                let (lo, hi) = (Complex64::from_polar(1.0, -phi / 2.0), Complex64::from_polar(1.0, phi / 2.0));
                for (i, a) in amps.iter_mut().enumerate() {
                    *a *= if i & m == 0 { lo } else { hi };
                }
            }
            Gate::Cx(c, t) => {
                let (mc, mt) = (1 << c, 1 << t);
                for i in (0..dim).filter(|i| i & mc != 0 && i & mt == 0) {
                    amps.swap(i, i | mt);
                }
            }
            Gate::Swap(a, b) => {
                let (ma, mb) = (1 << a, 1 << b);
                for i in (0..dim).filter(|i| i & ma != 0 && i & mb == 0) {
                    amps.swap(i, i ^ ma ^ mb);
                }
            }
        }
        Ok(())
    }

    fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amps)
    }
}

fn scale_set(amps: &mut [Complex64], mask: usize, factor: Complex64) {
    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask != 0 {
            *a *= factor;
        }
    }
}

/// Bit masks and phase of a Pauli word: `P|b> = i^k (-1)^{|b & z|} |b ^ x>`.
fn pauli_action(p: &PauliString) -> (usize, usize, Complex64) {
    let (mut x, mut z, mut ys) = (0usize, 0usize, 0u32);
    for q in 0..p.num_qubits() {
        if p.x_bit(q) {
            x |= 1 << q;
        }
        if p.z_bit(q) {
            z |= 1 << q;
        }
        if p.x_bit(q) && p.z_bit(q) {
            ys += 1;
        }
    }
    (x, z, I.powu((p.phase() as u32 + ys) % 4))
}

/// `H|psi>` without building a matrix.
fn apply_pauli_sum(h: &PauliSum, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; v.len()];
    for t in h.iter() {
        let (x, z, ph) = pauli_action(&t.pauli);
        let w = ph * t.coeff;
        for (b, &a) in v.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let sign = if (b & z).count_ones() % 2 == 1 { -w } else { w };
            out[b ^ x] += sign * a;
        }
    }
    out
}

/// Dense `2^n x 2^n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    num_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim == 0 || !dim.is_power_of_two() {
            return Err(Error::input(format!("operator shape {}x{} is not 2^n square", dim, matrix.ncols())));
        }
        Ok(DenseOperator { num_qubits: dim.trailing_zeros() as usize, matrix })
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        guard(num_qubits, DENSE_QUBIT_LIMIT)?;
        let dim = 1 << num_qubits;
        Ok(DenseOperator { num_qubits, matrix: DMatrix::identity(dim, dim) })
    }

    pub fn from_pauli_sum(h: &PauliSum) -> Result<Self> {
        let n = h.num_qubits();
        guard(n, DENSE_QUBIT_LIMIT)?;
        let dim = 1usize << n;
        let mut m = DMatrix::zeros(dim, dim);
        for t in h.iter() {
            let (x, z, ph) = pauli_action(&t.pauli);
            let w = ph * t.coeff;
            for b in 0..dim {
                let sign = if (b & z).count_ones() % 2 == 1 { -w } else { w };
                m[(b ^ x, b)] += sign;
            }
        }
        Ok(DenseOperator { num_qubits: n, matrix: m })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).norm() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let dim = self.matrix.nrows();
        (self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(dim, dim)).norm() <= tol
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if s.num_qubits != self.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: s.num_qubits });
        }
        let v = &self.matrix * s.to_dvector();
        Ok(StateVector { num_qubits: s.num_qubits, amps: v.iter().copied().collect() })
    }

    /// `self · other`.
    pub fn compose(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        Ok(DenseOperator { num_qubits: self.num_qubits, matrix: &self.matrix * &other.matrix })
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator { num_qubits: self.num_qubits, matrix: self.matrix.adjoint() }
    }

    /// `min_phi ||self - e^{i phi} other||_F`.
    pub fn distance_up_to_phase(&self, other: &DenseOperator) -> f64 {
        let overlap: Complex64 = (other.matrix.adjoint() * &self.matrix).trace();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        (&self.matrix - &other.matrix * phase).norm()
    }

    /// Largest singular value of `self - other`, after removing the best
    /// global phase.
    pub fn spectral_distance_up_to_phase(&self, other: &DenseOperator) -> f64 {
        let overlap: Complex64 = (other.matrix.adjoint() * &self.matrix).trace();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        let diff = &self.matrix - &other.matrix * phase;
        diff.singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
    }

    /// `exp(-i t H)` for this operator `H`, by scaling and squaring a
    /// truncated Taylor series.
    pub fn exp_minus_i(&self, t: f64) -> DenseOperator {
        let a = &self.matrix * Complex64::new(0.0, -t);
        DenseOperator { num_qubits: self.num_qubits, matrix: expm(&a) }
    }
}

const TAYLOR_ORDER: usize = 18;

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a * Complex64::new(0.5f64.powi(squarings), 0.0);
    let mut result = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..=TAYLOR_ORDER {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Exact dense unitary of a circuit (first gate applied first).
pub fn unitary_of(c: &Circuit) -> Result<DenseOperator> {
    let n = c.num_qubits();
    guard(n, UNITARY_QUBIT_LIMIT)?;
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(n, col)?;
        for g in c.gates() {
            s.apply_gate(g)?;
        }
        m.set_column(col, &s.to_dvector());
    }
    Ok(DenseOperator { num_qubits: n, matrix: m })
}

pub fn apply_circuit(c: &Circuit, s: &StateVector) -> Result<StateVector> {
    if c.num_qubits() != s.num_qubits {
        return Err(Error::QubitCountMismatch { left: c.num_qubits(), right: s.num_qubits });
    }
    let mut out = s.clone();
    for g in c.gates() {
        out.apply_gate(g)?;
    }
    Ok(out)
}

/// `exp(-i H t)|s>`.
///
/// Up to eight qubits the dense exponential is formed; larger registers
/// propagate the vector through short Taylor steps instead.
pub fn exact_evolve(h: &PauliSum, t: f64, s: &StateVector) -> Result<StateVector> {
    let n = h.num_qubits();
    if n != s.num_qubits {
        return Err(Error::QubitCountMismatch { left: n, right: s.num_qubits });
    }
    guard(n, DENSE_QUBIT_LIMIT)?;
    if t == 0.0 {
        return Ok(s.clone());
    }
    if n <= 8 {
        return DenseOperator::from_pauli_sum(h)?.exp_minus_i(t).apply(s);
    }
    let norm = h.one_norm();
    let steps = ((norm * t.abs()) / 0.5).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut v = s.amps.clone();
    for _ in 0..steps {
        let mut term = v.clone();
        let mut acc = v.clone();
        for k in 1..=40 {
            let hv = apply_pauli_sum(h, &term);
            let f = Complex64::new(0.0, -dt / k as f64);
            term = hv.into_iter().map(|z| z * f).collect();
            let size: f64 = term.iter().map(|z| z.norm_sqr()).sum();
            for (a, b) in acc.iter_mut().zip(&term) {
                *a += b;
            }
            if size < 1e-34 {
                break;
            }
        }
        v = acc;
    }
    Ok(StateVector { num_qubits: n, amps: v })
}

/// `<s|O|s>`; errors if the imaginary residue exceeds `1e-10`.
pub fn expectation(obs: &PauliSum, s: &StateVector) -> Result<f64> {
    if obs.num_qubits() != s.num_qubits {
        return Err(Error::QubitCountMismatch { left: obs.num_qubits(), right: s.num_qubits });
    }
    let mut total = ZERO;
    for t in obs.iter() {
        let (x, z, ph) = pauli_action(&t.pauli);
        let mut acc = ZERO;
        for (b, &a) in s.amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let v = s.amps[b ^ x].conj() * a;
            acc += if (b & z).count_ones() % 2 == 1 { -v } else { v };
        }
        total += acc * ph * t.coeff;
    }
    if total.im.abs() > 1e-10 {
        return Err(Error::NonHermitian(format!("expectation has imaginary part {}", total.im)));
    }
    Ok(total.re)
}

/// Multinomial sample of computational-basis outcomes. Keys are bit strings
/// with qubit 0 first.
pub fn sample_counts(s: &StateVector, shots: usize, seed: u64) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    if shots == 0 {
        return counts;
    }
    let mut cdf = Vec::with_capacity(s.amps.len());
    let mut acc = 0.0;
    for a in &s.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0usize; s.amps.len()];
    for _ in 0..shots {
        let r: f64 = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
        hist[idx] += 1;
    }
    for (idx, &count) in hist.iter().enumerate() {
        if count > 0 {
            counts.insert(bitstring(idx, s.num_qubits), count);
        }
    }
    counts
}

pub fn bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits).map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::dense::{self, circuit_matrix, mat_close};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_circuit(n: usize, len: usize, seed: u64) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(n);
        for _ in 0..len {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let g = match rng.gen_range(0..9) {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::Sdg(a),
                3 => Gate::X(a),
                4 => Gate::Y(a),
                5 => Gate::Z(a),
                6 => Gate::Rz(a, rng.gen_range(-3.0..3.0)),
                7 => Gate::Cx(a, b),
                _ => Gate::Swap(a, b),
            };
            c.push(g).unwrap();
        }
        c
    }

    fn random_sum(n: usize, terms: usize, seed: u64) -> PauliSum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = PauliSum::new(n);
        for _ in 0..terms {
            let letters: String = (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)]).collect();
            s.push(rng.gen_range(-1.0..1.0), PauliString::parse(&letters, n).unwrap()).unwrap();
        }
        s
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Complex64> =
            (0..1 << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(v).unwrap()
    }

    fn sum_terms(s: &PauliSum) -> Vec<(f64, String)> {
        s.iter().map(|t| (t.coeff, t.pauli.letters())).collect()
    }

    #[test]
    fn x_flips_zero() {
        let s = apply_circuit(&Circuit::from_gates(1, [Gate::X(0)]).unwrap(), &StateVector::zero(1).unwrap()).unwrap();
        assert_eq!(s, StateVector::from_bitstring("1").unwrap());
    }

    #[test]
    fn bell_state() {
        let c = Circuit::from_gates(2, [Gate::H(0), Gate::Cx(0, 1)]).unwrap();
        let s = apply_circuit(&c, &StateVector::zero(2).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = [h, 0.0, 0.0, h];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a - Complex64::new(w, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn random_six_qubit_circuit_matches_dense_product() {
        let c = random_circuit(6, 80, 3);
        let s0 = random_state(6, 4);
        let got = apply_circuit(&c, &s0).unwrap();
        let want = circuit_matrix(&c) * DVector::from_column_slice(s0.amplitudes());
        for (a, b) in got.amplitudes().iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!((got.norm() - 1.0).abs() < 1e-12);
        let u = unitary_of(&c).unwrap();
        assert!(mat_close(u.matrix(), &circuit_matrix(&c), 1e-10));
        assert!(u.is_unitary(1e-10));
    }

    #[test]
    fn pauli_sum_matrix_matches_kronecker_products() {
        let h = random_sum(4, 12, 5);
        let m = DenseOperator::from_pauli_sum(&h).unwrap();
        assert!(mat_close(m.matrix(), &dense::pauli_sum_matrix(4, &sum_terms(&h)), 1e-12));
        assert!(m.is_hermitian(1e-12));
    }

    #[test]
    fn single_x_rabi_oscillation() {
        let c = 0.7;
        let h = PauliSum::from_labels(1, &[("X", c)]).unwrap();
        let z = PauliSum::from_labels(1, &[("Z", 1.0)]).unwrap();
        for &t in &[0.0, 0.3, 1.1, 4.0] {
            let s = exact_evolve(&h, t, &StateVector::zero(1).unwrap()).unwrap();
            assert!((expectation(&z, &s).unwrap() - (2.0 * c * t).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_evolution_matches_eigendecomposition() {
        let h = random_sum(4, 10, 8);
        let s0 = random_state(4, 9);
        let hm = dense::pauli_sum_matrix(4, &sum_terms(&h));
        for &t in &[0.2, 1.0, 5.5] {
            let got = exact_evolve(&h, t, &s0).unwrap();
            let want = dense::expm_hermitian(&hm, t) * DVector::from_column_slice(s0.amplitudes());
            for (a, b) in got.amplitudes().iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-10, "t={t}");
            }
        }
    }

    #[test]
    fn taylor_propagation_matches_dense_path() {
        // same Hamiltonian through both code paths
        let h = random_sum(9, 15, 21);
        let s0 = random_state(9, 22);
        let dense_path = DenseOperator::from_pauli_sum(&h).unwrap().exp_minus_i(0.9).apply(&s0).unwrap();
        let vector_path = exact_evolve(&h, 0.9, &s0).unwrap();
        for (a, b) in dense_path.amplitudes().iter().zip(vector_path.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn evolution_composes() {
        let h = random_sum(4, 12, 11);
        let s0 = random_state(4, 12);
        let a = exact_evolve(&h, 0.7, &exact_evolve(&h, 1.6, &s0).unwrap()).unwrap();
        let b = exact_evolve(&h, 2.3, &s0).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_time_is_exact_identity() {
        let h = random_sum(3, 6, 1);
        let obs = random_sum(3, 5, 2);
        let s0 = random_state(3, 3);
        let s1 = exact_evolve(&h, 0.0, &s0).unwrap();
        assert_eq!(expectation(&obs, &s1).unwrap(), expectation(&obs, &s0).unwrap());
    }

    #[test]
    fn simple_expectations() {
        let z = PauliSum::from_labels(1, &[("Z", 1.0)]).unwrap();
        assert_eq!(expectation(&z, &StateVector::zero(1).unwrap()).unwrap(), 1.0);
        let plus = apply_circuit(&Circuit::from_gates(1, [Gate::H(0)]).unwrap(), &StateVector::zero(1).unwrap()).unwrap();
        assert!(expectation(&z, &plus).unwrap().abs() < 1e-15);
    }

    #[test]
    fn expectation_matches_dense_oracle() {
        let obs = random_sum(5, 20, 31);
        let s = random_state(5, 32);
        let m = dense::pauli_sum_matrix(5, &sum_terms(&obs));
        let want = dense::expectation(&m, &DVector::from_column_slice(s.amplitudes()));
        assert!((expectation(&obs, &s).unwrap() - want.re).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn expectation_is_linear(seed in 0u64..500, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let o1 = random_sum(3, 4, seed);
            let o2 = random_sum(3, 4, seed + 1000);
            let s = random_state(3, seed + 2000);
            let combined = o1.scaled(a).concat(&o2.scaled(b)).unwrap();
            let lhs = expectation(&combined, &s).unwrap();
            let rhs = a * expectation(&o1, &s).unwrap() + b * expectation(&o2, &s).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn gates_preserve_norm(seed in 0u64..500) {
            let c = random_circuit(5, 40, seed);
            let mut s = random_state(5, seed + 1);
            for g in c.gates() {
                s.apply_gate(g).unwrap();
                prop_assert!((s.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn size_guards() {
        let h = PauliSum::new(13);
        let s = StateVector::zero(13).unwrap();
        assert!(matches!(exact_evolve(&h, 1.0, &s), Err(Error::TooManyQubits { .. })));
        assert!(matches!(unitary_of(&Circuit::new(11)), Err(Error::TooManyQubits { .. })));
        let small = PauliSum::new(2);
        assert!(matches!(exact_evolve(&small, 1.0, &s), Err(Error::QubitCountMismatch { .. })));
    }

    #[test]
    fn sampling_statistics() {
        let s0 = StateVector::zero(3).unwrap();
        assert!(sample_counts(&s0, 0, 1).is_empty());
        let basis = StateVector::from_bitstring("101").unwrap();
        let counts = sample_counts(&basis, 1000, 7);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts["101"], 1000);

        let mut c = Circuit::new(3);
        for q in 0..3 {
            c.push(Gate::H(q)).unwrap();
        }
        let uniform = apply_circuit(&c, &s0).unwrap();
        let shots = 100_000;
        let counts = sample_counts(&uniform, shots, 42);
        assert_eq!(counts.len(), 8);
        let p = 1.0 / 8.0;
        let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
        for &k in counts.values() {
            assert!((k as f64 - shots as f64 * p).abs() < 5.0 * sigma);
        }
        assert_eq!(counts, sample_counts(&uniform, shots, 42));
    }
}
