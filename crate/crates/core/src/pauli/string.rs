use std::fmt;
use std::str::FromStr;

use crate::circuit::Gate;
use crate::error::{Error, Result};

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli word `i^phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}` in symplectic form.
///
/// The bit pair `(x_q, z_q)` selects the factor on qubit `q`: `(1,0)=X`,
/// `(1,1)=Y`, `(0,1)=Z`. `Y` is stored as itself, not as `XZ`, so a phase of
/// zero always denotes a Hermitian operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        PauliString { num_qubits, x: vec![0; words(num_qubits)], z: vec![0; words(num_qubits)], phase: 0 }
    }

    /// A single-qubit Pauli embedded in `num_qubits` qubits.
    pub fn single(num_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        if qubit >= num_qubits {
            return Err(Error::QubitOutOfRange { qubit, num_qubits });
        }
        let mut p = PauliString::identity(num_qubits);
        p.set(qubit, pauli);
        Ok(p)
    }

    /// Builds a string from explicit symplectic bit vectors.
    pub fn from_bits(x: &[bool], z: &[bool]) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::QubitCountMismatch { left: x.len(), right: z.len() });
        }
        let mut p = PauliString::identity(x.len());
        for q in 0..x.len() {
            p.set(q, Pauli::from_bits(x[q], z[q]));
        }
        Ok(p)
    }

    /// Parses letters `I`, `X`, `Y`, `Z`; letter `i` addresses qubit `i`.
    ///
    /// An optional phase prefix (`+`, `-`, `i`, `+i`, `-i`) is accepted so that
    /// the textual form round-trips for every phase.
    pub fn parse(text: &str, num_qubits: usize) -> Result<Self> {
        let (phase, letters) = split_phase(text);
        let count = letters.chars().count();
        if count != num_qubits {
            return Err(Error::LengthMismatch { expected: num_qubits, found: count });
        }
        let mut p = PauliString::identity(num_qubits);
        for (q, ch) in letters.chars().enumerate() {
            let pauli = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => {
                    return Err(Error::InvalidPauliChar { ch, position: q + text.len() - letters.len() })
                }
            };
            p.set(q, pauli);
        }
        p.phase = phase;
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Exponent `k` of the prefactor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// True for phases `+1` and `-1`.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// `+1.0` or `-1.0` for Hermitian strings.
    pub fn sign(&self) -> Option<f64> {
        match self.phase {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let (w, b) = (qubit / 64, qubit % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli) {
        assert!(qubit < self.num_qubits, "qubit {qubit} out of range");
        let (w, b) = (qubit / 64, qubit % 64);
        let (x, z) = pauli.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        (self.x[qubit / 64] >> (qubit % 64)) & 1 == 1
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        (self.z[qubit / 64] >> (qubit % 64)) & 1 == 1
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// True when the string has no X or Y factor.
    pub fn is_z_type(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    /// The same letters with phase +1.
    pub fn unsigned(&self) -> PauliString {
        PauliString { phase: 0, ..self.clone() }
    }

    fn check_size(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        Ok(())
    }

    /// Operator product `self · other`, tracking the fourth-root-of-unity phase.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_size(other)?;
        let mut plus = 0u32;
        let mut minus = 0u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (ax, az, bx, bz) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (a_x, a_y, a_z) = (ax & !az, ax & az, !ax & az);
            let (b_x, b_y, b_z) = (bx & !bz, bx & bz, !bx & bz);
            // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
            plus += ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones();
            minus += ((a_y & b_x) | (a_z & b_y) | (a_x & b_z)).count_ones();
            x.push(ax ^ bx);
            z.push(az ^ bz);
        }
        let phase = (self.phase as u32 + other.phase as u32 + plus + 3 * minus) % 4;
        Ok(PauliString { num_qubits: self.num_qubits, x, z, phase: phase as u8 })
    }

    /// True iff the symplectic product of the two strings is even.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        parity == 0
    }

    /// Returns `g† · self · g` for a Clifford gate `g`.
    pub fn conjugate_by_gate(&self, gate: &Gate) -> Result<PauliString> {
        let mut p = self.clone();
        p.conjugate_in_place(gate)?;
        Ok(p)
    }

    /// In-place `self <- g† · self · g`.
    pub fn conjugate_in_place(&mut self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
            }
        }
        let mut flip = false;
        match *gate {
            Gate::H(q) => {
                let (x, z) = (self.x_bit(q), self.z_bit(q));
                flip = x && z;
                self.set(q, Pauli::from_bits(z, x));
            }
            Gate::S(q) => {
                // S† X S = -Y, S† Y S = X
                let (x, z) = (self.x_bit(q), self.z_bit(q));
                flip = x && !z;
                self.set(q, Pauli::from_bits(x, z ^ x));
            }
            Gate::Sdg(q) => {
                // S X S† = Y, S Y S† = -X
                let (x, z) = (self.x_bit(q), self.z_bit(q));
                flip = x && z;
                self.set(q, Pauli::from_bits(x, z ^ x));
            }
            Gate::X(q) => flip = self.z_bit(q),
            Gate::Y(q) => flip = self.x_bit(q) ^ self.z_bit(q),
            Gate::Z(q) => flip = self.x_bit(q),
            Gate::Cx(c, t) => {
                let (xc, zc, xt, zt) = (self.x_bit(c), self.z_bit(c), self.x_bit(t), self.z_bit(t));
                flip = xc && zt && !(xt ^ zc);
                self.set(t, Pauli::from_bits(xt ^ xc, zt));
                self.set(c, Pauli::from_bits(xc, zc ^ zt));
            }
            Gate::Swap(a, b) => {
                let (pa, pb) = (self.get(a), self.get(b));
                self.set(a, pb);
                self.set(b, pa);
            }
            Gate::Rz(..) => return Err(Error::NotClifford(gate.to_string())),
        }
        if flip {
            self.phase = (self.phase + 2) % 4;
        }
        Ok(())
    }

    /// Drops the listed qubits (ascending or not), keeping the remaining order.
    pub fn remove_qubits(&self, removed: &[usize]) -> PauliString {
        let keep: Vec<usize> = (0..self.num_qubits).filter(|q| !removed.contains(q)).collect();
        let mut p = PauliString::identity(keep.len());
        for (new_q, &old_q) in keep.iter().enumerate() {
            p.set(new_q, self.get(old_q));
        }
        p.phase = self.phase;
        p
    }

    pub fn letters(&self) -> String {
        (0..self.num_qubits).map(|q| self.get(q).letter()).collect()
    }
}

fn split_phase(text: &str) -> (u8, &str) {
    for (prefix, phase) in [("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)] {
        if let Some(rest) = text.strip_prefix(prefix) {
            return (phase, rest);
        }
    }
    (0, text)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}{}", self.letters())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (_, letters) = split_phase(s);
        PauliString::parse(s, letters.chars().count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::dense::{
        commutator_is_zero, kron_paulis, mat_close, mat_mul, pauli_matrix_letters, scale, Mat,
    };
    use num_complex::Complex64;
    use proptest::prelude::*;

    const ALL_GATES_2Q: [Gate; 9] = [
        Gate::H(0),
        Gate::S(0),
        Gate::Sdg(0),
        Gate::X(0),
        Gate::Y(0),
        Gate::Z(0),
        Gate::Cx(0, 1),
        Gate::Cx(1, 0),
        Gate::Swap(0, 1),
    ];

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn dense(pauli: &PauliString) -> Mat {
        let m = pauli_matrix_letters(&pauli.letters());
        let ph = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][pauli.phase() as usize];
        scale(&m, ph)
    }

    fn all_strings(n: usize) -> Vec<PauliString> {
        let mut out = Vec::new();
        for code in 0..4usize.pow(n as u32) {
            let letters: String = (0..n).map(|q| ['I', 'X', 'Y', 'Z'][(code >> (2 * q)) & 3]).collect();
            out.push(p(&letters));
        }
        out
    }

    #[test]
    fn parse_worked_example() {
        let s = PauliString::parse("ZIXYZ", 5).unwrap();
        assert_eq!(s.weight(), 4);
        let xs: Vec<usize> = (0..5).filter(|&q| s.x_bit(q)).collect();
        let zs: Vec<usize> = (0..5).filter(|&q| s.z_bit(q)).collect();
        assert_eq!(xs, vec![2, 3]);
        assert_eq!(zs, vec![0, 3, 4]);
        assert_eq!(s.phase(), 0);
    }

    #[test]
    fn parse_identity_and_xy() {
        let id = PauliString::parse("IIII", 4).unwrap();
        assert!(id.is_identity());
        assert_eq!(id.weight(), 0);

        let xy = PauliString::parse("XY", 2).unwrap();
        assert!(xy.x_bit(0) && xy.x_bit(1));
        assert!(!xy.z_bit(0) && xy.z_bit(1));
        // X⊗Y with qubit 0 as the least significant tensor factor
        let expected = kron_paulis(&['X', 'Y']);
        assert!(mat_close(&dense(&xy), &expected, 1e-15));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            PauliString::parse("XQ", 2),
            Err(Error::InvalidPauliChar { ch: 'Q', position: 1 })
        ));
        assert!(matches!(
            PauliString::parse("XX", 3),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn textual_round_trip_with_phase() {
        for text in ["XYZI", "-XYZI", "iZZ", "-iY", "I"] {
            let s: PauliString = text.parse().unwrap();
            assert_eq!(s.to_string().parse::<PauliString>().unwrap(), s);
        }
        assert_eq!(p("+XY").to_string(), "XY");
    }

    #[test]
    fn multiply_examples() {
        let xz = p("X").multiply(&p("Z")).unwrap();
        assert_eq!(xz, p("-iY"));
        for s in ["XYZ", "IZY", "YYY"] {
            let sq = p(s).multiply(&p(s)).unwrap();
            assert!(sq.is_identity() && sq.phase() == 0);
        }
        assert_eq!(p("XI").multiply(&p("IX")).unwrap(), p("XX"));
        assert!(matches!(p("X").multiply(&p("XX")), Err(Error::QubitCountMismatch { .. })));
    }

    #[test]
    fn multiply_matches_dense_products() {
        for a in all_strings(2) {
            for b in all_strings(2) {
                let prod = a.multiply(&b).unwrap();
                assert!(prod.weight() <= a.weight() + b.weight());
                let expected = mat_mul(&dense(&a), &dense(&b));
                assert!(mat_close(&dense(&prod), &expected, 1e-14), "{a} * {b}");
            }
        }
    }

    #[test]
    fn commutation_matches_dense_commutator_exhaustively() {
        for n in 1..=2 {
            for a in all_strings(n) {
                for b in all_strings(n) {
                    let fast = a.commutes(&b).unwrap();
                    assert_eq!(fast, commutator_is_zero(&dense(&a), &dense(&b)), "{a} vs {b}");
                    // phase agreement of a·b and b·a
                    let ab = a.multiply(&b).unwrap();
                    let ba = b.multiply(&a).unwrap();
                    assert_eq!(fast, ab.phase() == ba.phase());
                }
            }
        }
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(p("XYZ").commutes(&p("III")).unwrap());
    }

    fn gate_matrix(g: &Gate, n: usize) -> Mat {
        crate::testing::dense::gate_matrix(g, n)
    }

    #[test]
    fn conjugation_matches_dense_oracle() {
        for g in ALL_GATES_2Q {
            let u = gate_matrix(&g, 2);
            let udg = crate::testing::dense::dagger(&u);
            for a in all_strings(2) {
                let got = a.conjugate_by_gate(&g).unwrap();
                let expected = mat_mul(&mat_mul(&udg, &dense(&a)), &u);
                assert!(mat_close(&dense(&got), &expected, 1e-14), "{g:?} on {a}");
            }
        }
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(p("X").conjugate_by_gate(&Gate::H(0)).unwrap(), p("Z"));
        assert_eq!(p("XI").conjugate_by_gate(&Gate::Cx(0, 1)).unwrap(), p("XX"));
        // S† X S = -Y
        assert_eq!(p("X").conjugate_by_gate(&Gate::S(0)).unwrap(), p("-Y"));
        assert!(matches!(
            p("X").conjugate_by_gate(&Gate::H(3)),
            Err(Error::QubitOutOfRange { qubit: 3, .. })
        ));
        assert!(matches!(p("X").conjugate_by_gate(&Gate::Rz(0, 0.1)), Err(Error::NotClifford(_))));
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0u8..4, n).prop_map(move |codes| {
            let letters: String = codes.iter().map(|&c| ['I', 'X', 'Y', 'Z'][c as usize]).collect();
            PauliString::parse(&letters, n).unwrap()
        })
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        (0usize..8, 0..n, 1..n).prop_map(move |(kind, a, off)| {
            let b = (a + off) % n;
            match kind {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::Sdg(a),
                3 => Gate::X(a),
                4 => Gate::Y(a),
                5 => Gate::Z(a),
                6 => Gate::Cx(a, b),
                _ => Gate::Swap(a, b),
            }
        })
    }

    proptest! {
        #[test]
        fn conjugation_preserves_commutation(
            a in arb_pauli(6), b in arb_pauli(6), gates in proptest::collection::vec(arb_gate(6), 1..20)
        ) {
            let before = a.commutes(&b).unwrap();
            let (mut ca, mut cb) = (a.clone(), b.clone());
            for g in &gates {
                ca.conjugate_in_place(g).unwrap();
                cb.conjugate_in_place(g).unwrap();
            }
            prop_assert_eq!(before, ca.commutes(&cb).unwrap());
            prop_assert_eq!(a.is_identity(), ca.is_identity());
            prop_assert!(ca.is_hermitian());
        }

        #[test]
        fn text_round_trip(a in arb_pauli(9), phase in 0u8..4) {
            let a = a.with_phase(phase);
            prop_assert_eq!(PauliString::parse(&a.to_string(), 9).unwrap(), a);
        }

        #[test]
        fn multiplication_is_associative(a in arb_pauli(5), b in arb_pauli(5), c in arb_pauli(5)) {
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }

    #[test]
    fn wide_strings_cross_word_boundary() {
        let n = 130;
        let mut a = PauliString::identity(n);
        a.set(0, Pauli::X);
        a.set(64, Pauli::Y);
        a.set(129, Pauli::Z);
        let mut b = PauliString::identity(n);
        b.set(64, Pauli::Z);
        assert_eq!(a.weight(), 3);
        assert!(!a.commutes(&b).unwrap());
        let ab = a.multiply(&b).unwrap();
        assert_eq!(ab.get(64), Pauli::X);
        assert_eq!(ab.phase(), 1); // Y Z = iX
        let swapped = a.conjugate_by_gate(&Gate::Swap(0, 129)).unwrap();
        assert_eq!(swapped.get(0), Pauli::Z);
        assert_eq!(swapped.get(129), Pauli::X);
    }
}
