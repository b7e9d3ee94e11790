//! Second-quantized operators and the Jordan-Wigner, Bravyi-Kitaev and parity
//! encodings.
//!
//! All three encodings are handled by one construction: an invertible binary
//! matrix `beta` sends occupation numbers `n` to qubit values `b = beta n`
//! (mod 2). Creating a fermion in mode `j` flips the qubits in column `j` of
//! `beta`, picks up the parity of the modes below `j`, and is projected onto
//! `n_j = 0`; each of those pieces is a Pauli word once `n` is rewritten as
//! `beta^-1 b`.
//!
//! Two-electron coefficients are taken as-is for the ordering
//! `a_i† a_j† a_k a_l`. Nothing here converts from chemists' or physicists'
//! integral notation; `MolecularIntegrals::from_spatial_chemist` is the one
//! place that does.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mapping {
    #[serde(rename = "jw")]
    JordanWigner,
    #[serde(rename = "bk")]
    BravyiKitaev,
    #[serde(rename = "parity")]
    Parity,
}

impl Mapping {
    pub const ALL: [Mapping; 3] = [Mapping::JordanWigner, Mapping::BravyiKitaev, Mapping::Parity];

    /// `beta[q][j]`: qubit `q` stores the parity of the modes `j` set here.
    pub fn encoding_matrix(self, n: usize) -> Vec<Vec<bool>> {
        (0..n)
            .map(|q| {
                (0..n)
                    .map(|j| match self {
                        Mapping::JordanWigner => j == q,
                        Mapping::Parity => j <= q,
                        Mapping::BravyiKitaev => {
                            // Fenwick node q+1 covers modes (q+1-lowbit, q+1]
                            let node = q + 1;
                            let low = node & node.wrapping_neg();
                            j + 1 > node - low && j < node
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mapping::JordanWigner => "jw",
            Mapping::BravyiKitaev => "bk",
            Mapping::Parity => "parity",
        })
    }
}

impl FromStr for Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan-wigner" | "jordan_wigner" => Ok(Mapping::JordanWigner),
            "bk" | "bravyi-kitaev" | "bravyi_kitaev" => Ok(Mapping::BravyiKitaev),
            "parity" | "pa" => Ok(Mapping::Parity),
            other => Err(Error::input(format!("unknown mapping {other:?} (expected jw, bk or parity)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LadderOp {
    pub mode: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        LadderOp { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        LadderOp { mode, dagger: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermionTerm {
    pub coeff: f64,
    pub ops: Vec<LadderOp>,
}

/// Real linear combination of ladder-operator products. An empty product is
/// the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionicOperator {
    num_modes: usize,
    terms: Vec<FermionTerm>,
}

#[derive(Serialize, Deserialize)]
struct FermionTermRecord {
    coeff: f64,
    ops: Vec<(usize, String)>,
}

#[derive(Serialize, Deserialize)]
struct FermionFile {
    num_spin_orbitals: usize,
    terms: Vec<FermionTermRecord>,
}

impl FermionicOperator {
    pub fn new(num_modes: usize) -> Self {
        FermionicOperator { num_modes, terms: Vec::new() }
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn terms(&self) -> &[FermionTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, coeff: f64, ops: Vec<LadderOp>) -> Result<()> {
        if !coeff.is_finite() {
            return Err(Error::NonFiniteCoefficient(coeff));
        }
        for op in &ops {
            if op.mode >= self.num_modes {
                return Err(Error::QubitOutOfRange { qubit: op.mode, num_qubits: self.num_modes });
            }
        }
        self.terms.push(FermionTerm { coeff, ops });
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: FermionFile = serde_json::from_str(text)?;
        let mut op = FermionicOperator::new(file.num_spin_orbitals);
        for (i, rec) in file.terms.into_iter().enumerate() {
            let mut ops = Vec::with_capacity(rec.ops.len());
            for (mode, kind) in rec.ops {
                let dagger = match kind.as_str() {
                    "+" => true,
                    "-" => false,
                    _ => return Err(Error::input(format!("term {i}: ladder flag {kind:?} is not \"+\" or \"-\""))),
                };
                ops.push(LadderOp { mode, dagger });
            }
            op.push(rec.coeff, ops).map_err(|e| Error::input(format!("term {i}: {e}")))?;
        }
        Ok(op)
    }

    pub fn to_json_string(&self) -> String {
        let file = FermionFile {
            num_spin_orbitals: self.num_modes,
            terms: self
                .terms
                .iter()
                .map(|t| FermionTermRecord {
                    coeff: t.coeff,
                    ops: t.ops.iter().map(|o| (o.mode, if o.dagger { "+" } else { "-" }.to_string())).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("fermion operator serialization is infallible")
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_json_str(&text).map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })
    }
}

/// Pauli sum with complex coefficients, used while multiplying ladder images.
#[derive(Clone, Debug, Default)]
struct ComplexPauliSum {
    terms: IndexMap<PauliString, Complex64>,
}

impl ComplexPauliSum {
    fn scalar(n: usize, c: Complex64) -> Self {
        let mut s = ComplexPauliSum::default();
        s.add(PauliString::identity(n), c);
        s
    }

    /// Adds `c * p`, absorbing the phase of `p` into `c`.
    fn add(&mut self, p: PauliString, c: Complex64) {
        let c = c * Complex64::i().powu(p.phase() as u32);
        *self.terms.entry(p.with_phase(0)).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    fn mul(&self, other: &ComplexPauliSum) -> Result<ComplexPauliSum> {
        let mut out = ComplexPauliSum::default();
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                out.add(p.multiply(q)?, a * b);
            }
        }
        Ok(out)
    }

    fn add_all(&mut self, other: ComplexPauliSum) {
        for (p, c) in other.terms {
            self.add(p, c);
        }
    }

    fn into_pauli_sum(self, n: usize) -> Result<PauliSum> {
        let mut out = PauliSum::new(n);
        for (p, c) in self.terms {
            if c.norm() <= 1e-12 {
                continue;
            }
            if c.im.abs() > 1e-10 {
                return Err(Error::NonHermitian(format!(
                    "mapped operator has coefficient {c} on {}",
                    p.letters()
                )));
            }
            out.push(c.re, p)?;
        }
        Ok(out)
    }
}

fn invert_gf2(m: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = m.len();
    let mut a: Vec<Vec<bool>> = m.to_vec();
    let mut inv: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r][col]).expect("encoding matrix is invertible");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        for r in 0..n {
            if r != col && a[r][col] {
                for k in 0..n {
                    a[r][k] ^= a[col][k];
                    inv[r][k] ^= inv[col][k];
                }
            }
        }
    }
    inv
}

/// Precomputed images of `a_j†` and `a_j` for every mode.
struct LadderImages {
    n: usize,
    create: Vec<ComplexPauliSum>,
    annihilate: Vec<ComplexPauliSum>,
}

impl LadderImages {
    fn new(mapping: Mapping, n: usize) -> Result<Self> {
        let beta = mapping.encoding_matrix(n);
        let inv = invert_gf2(&beta);
        let mut create = Vec::with_capacity(n);
        let mut annihilate = Vec::with_capacity(n);
        for j in 0..n {
            let mut flip = PauliString::identity(n);
            let mut parity = PauliString::identity(n);
            let mut occ = PauliString::identity(n);
            for q in 0..n {
                if beta[q][j] {
                    flip.set(q, crate::pauli::Pauli::X);
                }
                // parity of modes k < j, read from qubit q
                if (0..j).filter(|&k| inv[k][q]).count() % 2 == 1 {
                    parity.set(q, crate::pauli::Pauli::Z);
                }
                if inv[j][q] {
                    occ.set(q, crate::pauli::Pauli::Z);
                }
            }
            let half = Complex64::new(0.5, 0.0);
            // a_j† = X_U Z_P (I + Z_F)/2
            let xz = flip.multiply(&parity)?;
            let mut c = ComplexPauliSum::default();
            c.add(xz.clone(), half);
            c.add(xz.multiply(&occ)?, half);
            // a_j = (I + Z_F)/2 Z_P X_U
            let zx = parity.multiply(&flip)?;
            let mut a = ComplexPauliSum::default();
            a.add(zx.clone(), half);
            a.add(occ.multiply(&zx)?, half);
            create.push(c);
            annihilate.push(a);
        }
        Ok(LadderImages { n, create, annihilate })
    }

    fn product(&self, coeff: f64, ops: &[LadderOp]) -> Result<ComplexPauliSum> {
        let mut acc = ComplexPauliSum::scalar(self.n, Complex64::new(coeff, 0.0));
        for op in ops {
            let img = if op.dagger { &self.create[op.mode] } else { &self.annihilate[op.mode] };
            acc = acc.mul(img)?;
        }
        Ok(acc)
    }
}

/// Maps a Hermitian fermionic operator to qubits. Like terms are merged and
/// zeros dropped.
pub fn map_operator(f: &FermionicOperator, mapping: Mapping) -> Result<PauliSum> {
    let images = LadderImages::new(mapping, f.num_modes)?;
    let mut total = ComplexPauliSum::default();
    for t in &f.terms {
        total.add_all(images.product(t.coeff, &t.ops)?);
    }
    total.into_pauli_sum(f.num_modes)
}

pub fn map_jordan_wigner(f: &FermionicOperator) -> Result<PauliSum> {
    map_operator(f, Mapping::JordanWigner)
}

pub fn map_bravyi_kitaev(f: &FermionicOperator) -> Result<PauliSum> {
    map_operator(f, Mapping::BravyiKitaev)
}

pub fn map_parity(f: &FermionicOperator) -> Result<PauliSum> {
    map_operator(f, Mapping::Parity)
}

/// Images of a single ladder operator as `(coefficient, word)` pairs with
/// complex coefficients; exposed for algebraic checks.
pub fn ladder_image(mapping: Mapping, num_modes: usize, op: LadderOp) -> Result<Vec<(Complex64, PauliString)>> {
    if op.mode >= num_modes {
        return Err(Error::QubitOutOfRange { qubit: op.mode, num_qubits: num_modes });
    }
    let images = LadderImages::new(mapping, num_modes)?;
    let s = images.product(1.0, &[op])?;
    Ok(s.terms.into_iter().map(|(p, c)| (c, p)).collect())
}

/// Anticommutator of two mapped ladder operators, simplified. Returns the
/// surviving `(coefficient, word)` pairs.
pub fn mapped_anticommutator(
    mapping: Mapping,
    num_modes: usize,
    a: LadderOp,
    b: LadderOp,
) -> Result<Vec<(Complex64, PauliString)>> {
    let images = LadderImages::new(mapping, num_modes)?;
    let mut s = images.product(1.0, &[a, b])?;
    s.add_all(images.product(1.0, &[b, a])?);
    Ok(s.terms.into_iter().filter(|(_, c)| c.norm() > 0.0).map(|(p, c)| (c, p)).collect())
}

/// `Σ_rs h[r][s] a_s† a_r` for a real symmetric `h`.
pub fn one_body_observable(h_eff: &[Vec<f64>], mapping: Mapping) -> Result<PauliSum> {
    let n = h_eff.len();
    for (r, row) in h_eff.iter().enumerate() {
        if row.len() != n {
            return Err(Error::input(format!("row {r} of the one-body matrix has {} entries, expected {n}", row.len())));
        }
    }
    for r in 0..n {
        for s in 0..r {
            if (h_eff[r][s] - h_eff[s][r]).abs() > 1e-12 * (1.0 + h_eff[r][s].abs()) {
                return Err(Error::NonHermitian(format!(
                    "one-body matrix is not symmetric at ({r},{s}): {} vs {}",
                    h_eff[r][s], h_eff[s][r]
                )));
            }
        }
    }
    let mut f = FermionicOperator::new(n);
    for r in 0..n {
        for s in 0..n {
            if h_eff[r][s] != 0.0 {
                f.push(h_eff[r][s], vec![LadderOp::create(s), LadderOp::annihilate(r)])?;
            }
        }
    }
    map_operator(&f, mapping)
}

/// Square matrix from a header-less numeric CSV.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let file_err = |message: String| Error::File { path: path.to_path_buf(), message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| file_err(e.to_string()))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| file_err(format!("line {}: {e}", i + 1)))?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| file_err(format!("line {}: {v:?} is not a number", i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(file_err(format!("line {}: expected {n} columns, found {}", i + 1, r.len())));
    }
    Ok(rows)
}

/// Occupied spin-orbitals of a Slater determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HartreeFockState {
    num_qubits: usize,
    occupations: Vec<bool>,
}

impl HartreeFockState {
    pub fn new(num_qubits: usize, occupied: &[usize]) -> Result<Self> {
        let mut occupations = vec![false; num_qubits];
        for &m in occupied {
            if m >= num_qubits {
                return Err(Error::QubitOutOfRange { qubit: m, num_qubits });
            }
            occupations[m] = true;
        }
        Ok(HartreeFockState { num_qubits, occupations })
    }

    /// The lowest `electrons` spin-orbitals filled.
    pub fn lowest(num_qubits: usize, electrons: usize) -> Result<Self> {
        if electrons > num_qubits {
            return Err(Error::input(format!("{electrons} electrons do not fit in {num_qubits} spin-orbitals")));
        }
        HartreeFockState::new(num_qubits, &(0..electrons).collect::<Vec<_>>())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn occupations(&self) -> &[bool] {
        &self.occupations
    }

    pub fn electron_count(&self) -> usize {
        self.occupations.iter().filter(|&&b| b).count()
    }

    /// Qubit values `beta n` of the determinant under `mapping`.
    pub fn encoded_bits(&self, mapping: Mapping) -> Vec<bool> {
        let beta = mapping.encoding_matrix(self.num_qubits);
        beta.iter()
            .map(|row| row.iter().zip(&self.occupations).filter(|(a, b)| **a && **b).count() % 2 == 1)
            .collect()
    }
}

/// X gates preparing the encoded determinant from `|0...0>`.
pub fn hf_circuit(state: &HartreeFockState, mapping: Mapping) -> Circuit {
    let mut c = Circuit::new(state.num_qubits);
    for (q, bit) in state.encoded_bits(mapping).into_iter().enumerate() {
        if bit {
            c.push_unchecked(Gate::X(q));
        }
    }
    c
}

/// Spin-orbital integrals for `E0 + Σ h_ij a_i† a_j + Σ h_ijkl a_i† a_j† a_k a_l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MolecularIntegrals {
    pub num_spin_orbitals: usize,
    pub num_electrons: usize,
    pub constant: f64,
    pub one_body: Vec<Vec<f64>>,
    /// Sparse `[i, j, k, l, value]` entries.
    pub two_body: Vec<(usize, usize, usize, usize, f64)>,
}

impl MolecularIntegrals {
    /// Builds spin-orbital integrals from spatial-orbital chemists' notation
    /// `(pq|rs)`, interleaving spins as `2p + sigma`. Only the unique
    /// `(pq|rs)` entries need to be listed; the eight-fold symmetry is
    /// expanded here.
    pub fn from_spatial_chemist(
        num_electrons: usize,
        constant: f64,
        h: &[Vec<f64>],
        eri: &[(usize, usize, usize, usize, f64)],
    ) -> Result<Self> {
        let m = h.len();
        let n = 2 * m;
        let mut full = vec![0.0; m * m * m * m];
        let idx = |p: usize, q: usize, r: usize, s: usize| ((p * m + q) * m + r) * m + s;
        for &(p, q, r, s, v) in eri {
            if p.max(q).max(r).max(s) >= m {
                return Err(Error::input(format!("integral index ({p}{q}|{r}{s}) out of range for {m} orbitals")));
            }
            for (a, b, c, d) in [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r)] {
                full[idx(a, b, c, d)] = v;
                full[idx(c, d, a, b)] = v;
            }
        }
        let mut one_body = vec![vec![0.0; n]; n];
        for p in 0..m {
            for q in 0..m {
                for sigma in 0..2 {
                    one_body[2 * p + sigma][2 * q + sigma] = h[p][q];
                }
            }
        }
        // (1/2) Σ (pq|rs) a_p† a_r† a_s a_q  ->  h_{p r s q}
        let mut two = IndexMap::new();
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        let v = full[idx(p, q, r, s)];
                        if v == 0.0 {
                            continue;
                        }
                        for s1 in 0..2 {
                            for s2 in 0..2 {
                                let (i, j, k, l) = (2 * p + s1, 2 * r + s2, 2 * s + s2, 2 * q + s1);
                                if i == j || k == l {
                                    continue;
                                }
                                *two.entry((i, j, k, l)).or_insert(0.0) += 0.5 * v;
                            }
                        }
                    }
                }
            }
        }
        Ok(MolecularIntegrals {
            num_spin_orbitals: n,
            num_electrons,
            constant,
            one_body,
            two_body: two.into_iter().map(|((i, j, k, l), v)| (i, j, k, l, v)).collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_spin_orbitals;
        if self.one_body.len() != n || self.one_body.iter().any(|r| r.len() != n) {
            return Err(Error::input(format!("one-body block must be {n}x{n}")));
        }
        if self.num_electrons > n {
            return Err(Error::input(format!("{} electrons exceed {n} spin-orbitals", self.num_electrons)));
        }
        for &(i, j, k, l, v) in &self.two_body {
            if i.max(j).max(k).max(l) >= n {
                return Err(Error::input(format!("two-body index ({i},{j},{k},{l}) out of range")));
            }
            if !v.is_finite() {
                return Err(Error::NonFiniteCoefficient(v));
            }
        }
        Ok(())
    }

    pub fn to_fermionic_operator(&self) -> Result<FermionicOperator> {
        self.validate()?;
        let mut f = FermionicOperator::new(self.num_spin_orbitals);
        if self.constant != 0.0 {
            f.push(self.constant, Vec::new())?;
        }
        for (i, row) in self.one_body.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    f.push(v, vec![LadderOp::create(i), LadderOp::annihilate(j)])?;
                }
            }
        }
        for &(i, j, k, l, v) in &self.two_body {
            if v != 0.0 {
                f.push(
                    v,
                    vec![LadderOp::create(i), LadderOp::create(j), LadderOp::annihilate(k), LadderOp::annihilate(l)],
                )?;
            }
        }
        Ok(f)
    }

    pub fn hartree_fock_state(&self) -> Result<HartreeFockState> {
        HartreeFockState::lowest(self.num_spin_orbitals, self.num_electrons)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let ints: MolecularIntegrals = serde_json::from_str(text)?;
        ints.validate()?;
        Ok(ints)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_json_str(&text).map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })
    }
}
