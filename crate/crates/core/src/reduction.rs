//! Hamiltonian term truncation and Z2-symmetry qubit tapering.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationConfig {
    /// Largest tolerated change of an observable expectation.
    pub epsilon: f64,
    /// Longest simulated time (atomic units).
    pub t_max: f64,
}

impl TruncationConfig {
    pub fn new(epsilon: f64, t_max: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::config(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::config(format!("t_max must be positive, got {t_max}")));
        }
        Ok(TruncationConfig { epsilon, t_max })
    }
}

/// `c0 = epsilon / (2 t_max)`.
pub fn truncation_threshold(cfg: &TruncationConfig) -> f64 {
    cfg.epsilon / (2.0 * cfg.t_max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationResult {
    pub kept: PauliSum,
    pub threshold: f64,
    /// `Σ |c|` over dropped terms.
    pub removed_weight: f64,
    /// Kept terms over input terms (1 for an empty input).
    pub kept_fraction: f64,
    pub removed_count: usize,
}

#[derive(Serialize)]
pub struct TruncationReport {
    pub threshold: f64,
    pub kept_fraction: f64,
    pub removed_weight: f64,
    pub kept_terms: usize,
    pub removed_terms: usize,
}

impl TruncationResult {
    pub fn report(&self) -> TruncationReport {
        TruncationReport {
            threshold: self.threshold,
            kept_fraction: self.kept_fraction,
            removed_weight: self.removed_weight,
            kept_terms: self.kept.len(),
            removed_terms: self.removed_count,
        }
    }
}

/// Drops every non-identity term with `|c| < c0`, keeping order.
pub fn truncate(h: &PauliSum, cfg: &TruncationConfig) -> TruncationResult {
    let threshold = truncation_threshold(cfg);
    let mut removed_weight = 0.0;
    let mut removed_count = 0;
    let kept = h.filtered(|_, t| {
        let keep = t.pauli.is_identity() || t.coeff.abs() >= threshold;
        if !keep {
            removed_weight += t.coeff.abs();
            removed_count += 1;
        }
        keep
    });
    let kept_fraction = if h.is_empty() { 1.0 } else { kept.len() as f64 / h.len() as f64 };
    TruncationResult { kept, threshold, removed_weight, kept_fraction, removed_count }
}

/// Certified bound `2 t w ||A||_1` on the expectation shift caused by
/// dropping terms of total weight `w`.
pub fn max_expectation_drift(removed_weight: f64, t: f64, observable_norm_bound: f64) -> f64 {
    2.0 * t * removed_weight * observable_norm_bound
}

/// Reduced row echelon form over GF(2); returns the pivot columns.
fn rref(rows: &mut Vec<Vec<bool>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col]) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][col] {
                let pivot_row = rows[r].clone();
                for (a, b) in rows[i].iter_mut().zip(pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Basis of `{v : rows · v = 0}`, one vector per free column (ascending).
fn nullspace(rows: &[Vec<bool>], ncols: usize) -> Vec<Vec<bool>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![false; ncols];
        v[free] = true;
        for (row, &p) in m.iter().zip(&pivots) {
            v[p] = row[free];
        }
        basis.push(v);
    }
    basis
}

/// Independent Pauli strings commuting with every term of `h`: the GF(2)
/// kernel of the symplectic check matrix, identity excluded.
pub fn find_z2_symmetries(h: &PauliSum) -> Vec<PauliString> {
    let n = h.num_qubits();
    // unknown g = (gx | gz); term (x, z) commutes iff z·gx + x·gz = 0
    let rows: Vec<Vec<bool>> = h
        .iter()
        .map(|t| (0..n).map(|q| t.pauli.z_bit(q)).chain((0..n).map(|q| t.pauli.x_bit(q))).collect())
        .collect();
    nullspace(&rows, 2 * n)
        .into_iter()
        .map(|v| PauliString::from_bits(&v[..n], &v[n..]).expect("lengths agree"))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaperedSector {
    /// Eigenvalue assigned to each generator.
    pub signs: Vec<i8>,
    pub hamiltonian: PauliSum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaperingResult {
    pub num_qubits: usize,
    /// Z-type generators in reduced echelon form; generator `i` is the only
    /// one acting on `removed_qubits[i]`.
    pub symmetry_generators: Vec<PauliString>,
    pub removed_qubits: Vec<usize>,
    /// All `2^k` sectors; bit `i` of the index set means generator `i` is -1.
    pub sectors: Vec<TaperedSector>,
}

impl TaperingResult {
    pub fn num_removed(&self) -> usize {
        self.removed_qubits.len()
    }

    /// Sector index holding the computational basis state `bits` (qubit 0
    /// first).
    pub fn sector_of_bits(&self, bits: &[bool]) -> Result<usize> {
        if bits.len() != self.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: bits.len() });
        }
        let mut index = 0;
        for (i, g) in self.symmetry_generators.iter().enumerate() {
            let parity = (0..self.num_qubits).filter(|&q| g.z_bit(q) && bits[q]).count() % 2;
            if parity == 1 {
                index |= 1 << i;
            }
        }
        Ok(index)
    }

    /// The basis state with the tapered qubits removed.
    pub fn tapered_bits(&self, bits: &[bool]) -> Vec<bool> {
        bits.iter()
            .enumerate()
            .filter(|(q, _)| !self.removed_qubits.contains(q))
            .map(|(_, &b)| b)
            .collect()
    }

    /// Applies the same reduction to another operator, which must commute
    /// with every generator.
    pub fn taper_operator(&self, op: &PauliSum, sector: usize) -> Result<PauliSum> {
        let s = self
            .sectors
            .get(sector)
            .ok_or_else(|| Error::input(format!("sector {sector} out of range ({} sectors)", self.sectors.len())))?;
        for g in &self.symmetry_generators {
            for t in op.iter() {
                if !t.pauli.commutes(g)? {
                    return Err(Error::input(format!(
                        "term {} does not commute with symmetry {}",
                        t.pauli.letters(),
                        g.letters()
                    )));
                }
            }
        }
        reduce_sector(op, &self.symmetry_generators, &self.removed_qubits, &s.signs)
    }
}

fn reduce_sector(h: &PauliSum, gens: &[PauliString], removed: &[usize], signs: &[i8]) -> Result<PauliSum> {
    let n = h.num_qubits();
    let mut out = PauliSum::new(n - removed.len());
    for t in h.iter() {
        let mut p = t.pauli.clone();
        // U = (X_q + tau)/sqrt 2 sends P to P tau X_q when P anticommutes with X_q
        for (g, &q) in gens.iter().zip(removed) {
            if p.z_bit(q) {
                let xq = PauliString::single(n, q, Pauli::X)?;
                p = p.multiply(g)?.multiply(&xq)?;
            }
        }
        let mut coeff = t.coeff;
        for (&q, &s) in removed.iter().zip(signs) {
            match p.get(q) {
                Pauli::I => {}
                Pauli::X => coeff *= s as f64,
                other => {
                    return Err(Error::input(format!(
                        "tapered qubit {q} carries {} after rotation",
                        other.letter()
                    )))
                }
            }
        }
        let sign = p.sign().ok_or_else(|| Error::NonHermitian(format!("rotated term {p}")))?;
        out.push(coeff * sign, p.with_phase(0).remove_qubits(removed))?;
    }
    Ok(out.simplify(1e-14))
}

/// Removes one qubit per independent Z-type symmetry and returns every
/// symmetry sector.
pub fn taper(h: &PauliSum) -> Result<TaperingResult> {
    let n = h.num_qubits();
    // Z-type g commutes with (x, z) iff x·gz = 0
    let rows: Vec<Vec<bool>> = h.iter().map(|t| (0..n).map(|q| t.pauli.x_bit(q)).collect()).collect();
    let mut basis = nullspace(&rows, n);
    let removed = rref(&mut basis, n);
    let gens: Vec<PauliString> =
        basis.iter().map(|v| PauliString::from_bits(&vec![false; n], v).expect("lengths agree")).collect();
    let k = gens.len();
    let mut sectors = Vec::with_capacity(1 << k);
    for index in 0..1usize << k {
        let signs: Vec<i8> = (0..k).map(|i| if index >> i & 1 == 1 { -1 } else { 1 }).collect();
        let hamiltonian = reduce_sector(h, &gens, &removed, &signs)?;
        sectors.push(TaperedSector { signs, hamiltonian });
    }
    Ok(TaperingResult { num_qubits: n, symmetry_generators: gens, removed_qubits: removed, sectors })
}
