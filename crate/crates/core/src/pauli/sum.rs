use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::PauliString;
use crate::error::{Error, Result};

/// One weighted Pauli word. The stored word always has phase +1.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

/// Real linear combination of Pauli words, kept in insertion order.
///
/// Order matters for product formulas, so nothing here reorders terms unless
/// asked to.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    pauli: String,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct PauliSumFile {
    num_qubits: usize,
    terms: Vec<TermRecord>,
}

impl PauliSum {
    pub fn new(num_qubits: usize) -> Self {
        PauliSum { num_qubits, terms: Vec::new() }
    }

    pub fn from_terms(
        num_qubits: usize,
        terms: impl IntoIterator<Item = (f64, PauliString)>,
    ) -> Result<Self> {
        let mut sum = PauliSum::new(num_qubits);
        for (c, p) in terms {
            sum.push(c, p)?;
        }
        Ok(sum)
    }

    /// Convenience constructor from `(letters, coeff)` pairs.
    pub fn from_labels(num_qubits: usize, terms: &[(&str, f64)]) -> Result<Self> {
        let mut sum = PauliSum::new(num_qubits);
        for (letters, c) in terms {
            sum.push(*c, PauliString::parse(letters, num_qubits)?)?;
        }
        Ok(sum)
    }

    /// Appends `coeff * pauli`, folding a `-1` phase into the coefficient.
    pub fn push(&mut self, coeff: f64, pauli: PauliString) -> Result<()> {
        if pauli.num_qubits() != self.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: pauli.num_qubits() });
        }
        if !coeff.is_finite() {
            return Err(Error::NonFiniteCoefficient(coeff));
        }
        let sign = pauli
            .sign()
            .ok_or_else(|| Error::NonHermitian(format!("term {coeff} * {pauli} has an imaginary phase")))?;
        self.terms.push(PauliTerm { coeff: coeff * sign, pauli: pauli.with_phase(0) });
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PauliTerm> {
        self.terms.iter()
    }

    /// Merges repeated words (first occurrence fixes the position) and drops
    /// terms with `|coeff| <= tol`.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        let mut merged: IndexMap<PauliString, f64> = IndexMap::new();
        for t in &self.terms {
            *merged.entry(t.pauli.clone()).or_insert(0.0) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(pauli, coeff)| PauliTerm { coeff, pauli })
            .collect();
        PauliSum { num_qubits: self.num_qubits, terms }
    }

    /// Sum of the coefficients on the identity word.
    pub fn identity_coefficient(&self) -> f64 {
        self.terms.iter().filter(|t| t.pauli.is_identity()).map(|t| t.coeff).sum()
    }

    /// The identity offset and the remaining non-identity terms.
    pub fn split_identity(&self) -> (f64, PauliSum) {
        let rest = self.terms.iter().filter(|t| !t.pauli.is_identity()).cloned().collect();
        (self.identity_coefficient(), PauliSum { num_qubits: self.num_qubits, terms: rest })
    }

    /// `Σ |c_k|`, an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm { coeff: t.coeff * factor, pauli: t.pauli.clone() })
            .collect();
        PauliSum { num_qubits: self.num_qubits, terms }
    }

    /// Concatenation of the two term lists (no merging).
    pub fn concat(&self, other: &PauliSum) -> Result<PauliSum> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(PauliSum { num_qubits: self.num_qubits, terms })
    }

    /// Keeps the terms for which `keep` returns true, in order.
    pub fn filtered(&self, mut keep: impl FnMut(usize, &PauliTerm) -> bool) -> PauliSum {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .filter(|(i, t)| keep(*i, t))
            .map(|(_, t)| t.clone())
            .collect();
        PauliSum { num_qubits: self.num_qubits, terms }
    }

    pub fn to_json_string(&self) -> String {
        let file = PauliSumFile {
            num_qubits: self.num_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| TermRecord { pauli: t.pauli.letters(), coeff: t.coeff })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("Pauli sum serialization is infallible")
    }

    pub fn from_json_str(text: &str) -> Result<PauliSum> {
        let file: PauliSumFile = serde_json::from_str(text)?;
        let mut sum = PauliSum::new(file.num_qubits);
        for (i, rec) in file.terms.into_iter().enumerate() {
            let p = PauliString::parse(&rec.pauli, file.num_qubits)
                .map_err(|e| Error::input(format!("term {i}: {e}")))?;
            sum.push(rec.coeff, p).map_err(|e| Error::input(format!("term {i}: {e}")))?;
        }
        Ok(sum)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<PauliSum> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })?;
        PauliSum::from_json_str(&text)
            .map_err(|e| Error::File { path: path.to_path_buf(), message: e.to_string() })
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", t.coeff, t.pauli.letters())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_folds_negative_phase() {
        let mut s = PauliSum::new(2);
        s.push(0.5, "-XZ".parse().unwrap()).unwrap();
        assert_eq!(s.terms()[0].coeff, -0.5);
        assert_eq!(s.terms()[0].pauli.phase(), 0);
        assert!(matches!(s.push(1.0, "iXZ".parse().unwrap()), Err(Error::NonHermitian(_))));
        assert!(matches!(s.push(f64::NAN, "XZ".parse().unwrap()), Err(Error::NonFiniteCoefficient(_))));
        assert!(matches!(s.push(1.0, "X".parse().unwrap()), Err(Error::QubitCountMismatch { .. })));
    }

    #[test]
    fn simplify_keeps_first_occurrence_order() {
        let s = PauliSum::from_labels(2, &[("ZI", 1.0), ("XX", 0.5), ("ZI", 0.25), ("YY", 0.0)]).unwrap();
        let t = s.simplify(0.0);
        assert_eq!(t.len(), 2);
        assert_eq!(t.terms()[0].pauli.letters(), "ZI");
        assert_eq!(t.terms()[0].coeff, 1.25);
        assert_eq!(t.terms()[1].pauli.letters(), "XX");
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = PauliSum::from_labels(3, &[("III", -0.1), ("ZXY", 0.25), ("IIZ", 1e-7)]).unwrap();
        let back = PauliSum::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"num_qubits": 2, "terms": [{"pauli": "XQ", "coeff": 1.0}]}"#;
        let err = PauliSum::from_json_str(bad).unwrap_err().to_string();
        assert!(err.contains("term 0"), "{err}");
        assert!(PauliSum::from_json_str("{\"num_qubits\": 2,\n \"terms\": [}").is_err());
    }

    #[test]
    fn identity_split_and_norm() {
        let s = PauliSum::from_labels(2, &[("II", -1.5), ("ZZ", 0.5), ("XI", -0.25)]).unwrap();
        let (offset, rest) = s.split_identity();
        assert_eq!(offset, -1.5);
        assert_eq!(rest.len(), 2);
        assert_eq!(s.one_norm(), 2.25);
    }
}
