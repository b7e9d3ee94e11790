use std::collections::VecDeque;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use super::{Pauli, PauliString, PauliSum};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// An accumulated Clifford `F`, stored both as the gate sequence that
/// realises it and as the tableau of generator images `F† X_q F`, `F† Z_q F`.
///
/// `conjugate(P)` returns `F† P F`, the Heisenberg image of `P` when `F` is
/// applied to a state after everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordFrame {
    num_qubits: usize,
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
    gates: VecDeque<Gate>,
}

impl CliffordFrame {
    pub fn identity(num_qubits: usize) -> Self {
        let x_images = (0..num_qubits)
            .map(|q| PauliString::single(num_qubits, q, Pauli::X).expect("in range"))
            .collect();
        let z_images = (0..num_qubits)
            .map(|q| PauliString::single(num_qubits, q, Pauli::Z).expect("in range"))
            .collect();
        CliffordFrame { num_qubits, x_images, z_images, gates: VecDeque::new() }
    }

    /// Frame of the unitary implemented by a Clifford circuit.
    pub fn from_circuit(circuit: &Circuit) -> Result<Self> {
        let mut frame = CliffordFrame::identity(circuit.num_qubits());
        for g in circuit.gates().iter().rev() {
            frame.prepend_gate(g)?;
        }
        Ok(frame)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// True when the tableau is the identity (the gate list may still hold
    /// gates that multiply to the identity).
    pub fn is_identity(&self) -> bool {
        (0..self.num_qubits).all(|q| {
            let x = &self.x_images[q];
            let z = &self.z_images[q];
            x.phase() == 0
                && z.phase() == 0
                && x.weight() == 1
                && z.weight() == 1
                && x.get(q) == Pauli::X
                && z.get(q) == Pauli::Z
        })
    }

    /// `F <- F · g`: the gate runs before everything already in the frame.
    pub fn prepend_gate(&mut self, gate: &Gate) -> Result<()> {
        if !gate.is_clifford() {
            return Err(Error::NotClifford(gate.to_string()));
        }
        for img in self.x_images.iter_mut().chain(self.z_images.iter_mut()) {
            img.conjugate_in_place(gate)?;
        }
        self.gates.push_front(*gate);
        Ok(())
    }

    /// Time-ordered gates realising `F`.
    pub fn to_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.num_qubits);
        for g in &self.gates {
            c.push_unchecked(*g);
        }
        c
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// `F† P F`, assembled from the generator images.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: p.num_qubits() });
        }
        // P = i^(phase + #Y) ∏_q X_q^x Z_q^z  since Y = iXZ
        let y_count = (0..self.num_qubits).filter(|&q| p.x_bit(q) && p.z_bit(q)).count();
        let mut acc = PauliString::identity(self.num_qubits)
            .with_phase(((p.phase() as usize + y_count) % 4) as u8);
        for q in 0..self.num_qubits {
            if p.x_bit(q) {
                acc = acc.multiply(&self.x_images[q])?;
            }
            if p.z_bit(q) {
                acc = acc.multiply(&self.z_images[q])?;
            }
        }
        Ok(acc)
    }

    /// Conjugates every term, folding image signs into the coefficients.
    pub fn conjugate_sum(&self, sum: &PauliSum) -> Result<PauliSum> {
        let mut out = PauliSum::new(sum.num_qubits());
        for t in sum.iter() {
            out.push(t.coeff, self.conjugate(&t.pauli)?)?;
        }
        Ok(out)
    }

    pub fn x_image(&self, qubit: usize) -> &PauliString {
        &self.x_images[qubit]
    }

    pub fn z_image(&self, qubit: usize) -> &PauliString {
        &self.z_images[qubit]
    }
}

impl Serialize for CliffordFrame {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CliffordFrame", 4)?;
        st.serialize_field("num_qubits", &self.num_qubits)?;
        st.serialize_field("gates", &self.gates)?;
        let xs: Vec<String> = self.x_images.iter().map(|p| p.to_string()).collect();
        let zs: Vec<String> = self.z_images.iter().map(|p| p.to_string()).collect();
        st.serialize_field("x_images", &xs)?;
        st.serialize_field("z_images", &zs)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::dense::{circuit_matrix, dagger, pauli_matrix_letters};
    use proptest::prelude::*;

    fn sequential(p: &PauliString, gates: &[Gate]) -> PauliString {
        // G = g_m ... g_1, so G† P G conjugates by the last gate first
        let mut out = p.clone();
        for g in gates.iter().rev() {
            out.conjugate_in_place(g).unwrap();
        }
        out
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

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0u8..4, n).prop_map(move |codes| {
            let letters: String = codes.iter().map(|&c| ['I', 'X', 'Y', 'Z'][c as usize]).collect();
            PauliString::parse(&letters, n).unwrap()
        })
    }

    #[test]
    fn identity_frame_fixes_generators() {
        let f = CliffordFrame::identity(3);
        assert!(f.is_identity());
        let p: PauliString = "XYZ".parse().unwrap();
        assert_eq!(f.conjugate(&p).unwrap(), p);
    }

    #[test]
    fn images_keep_commutation_relations() {
        let c = Circuit::from_gates(
            4,
            [Gate::H(0), Gate::Cx(0, 2), Gate::S(2), Gate::Cx(3, 1), Gate::Sdg(1), Gate::H(3)],
        )
        .unwrap();
        let f = CliffordFrame::from_circuit(&c).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (xi, zj) = (f.x_image(i), f.z_image(j));
                assert_eq!(xi.commutes(zj).unwrap(), i != j);
                assert!(f.x_image(i).commutes(f.x_image(j)).unwrap());
                assert!(f.z_image(i).commutes(f.z_image(j)).unwrap());
            }
        }
    }

    #[test]
    fn conjugation_matches_dense_heisenberg_picture() {
        let c = Circuit::from_gates(
            3,
            [Gate::H(0), Gate::Cx(0, 1), Gate::S(1), Gate::Cx(1, 2), Gate::Y(0), Gate::Sdg(2)],
        )
        .unwrap();
        let f = CliffordFrame::from_circuit(&c).unwrap();
        let u = circuit_matrix(&c);
        for letters in ["XII", "IYZ", "ZZZ", "YXI"] {
            let p: PauliString = letters.parse().unwrap();
            let img = f.conjugate(&p).unwrap();
            let expected = dagger(&u) * pauli_matrix_letters(letters) * &u;
            let sign = num_complex::Complex64::new(img.sign().unwrap(), 0.0);
            let got = pauli_matrix_letters(&img.letters()) * sign;
            assert!((got - expected).norm() < 1e-12, "{letters}");
        }
    }

    proptest! {
        #[test]
        fn frame_matches_sequential_conjugation(
            gates in proptest::collection::vec(arb_gate(6), 0..30), p in arb_pauli(6)
        ) {
            let c = Circuit::from_gates(6, gates.clone()).unwrap();
            let f = CliffordFrame::from_circuit(&c).unwrap();
            prop_assert_eq!(f.conjugate(&p).unwrap(), sequential(&p, &gates));
            let rebuilt = f.to_circuit();
            prop_assert_eq!(rebuilt.gates(), c.gates());
        }

        #[test]
        fn frame_composition_is_associative(
            g1 in proptest::collection::vec(arb_gate(5), 0..15),
            g2 in proptest::collection::vec(arb_gate(5), 0..15),
            p in arb_pauli(5)
        ) {
            // frame(g1 then g2) == conjugation by g2's frame, then by g1's frame
            let both: Vec<Gate> = g1.iter().chain(&g2).copied().collect();
            let f12 = CliffordFrame::from_circuit(&Circuit::from_gates(5, both).unwrap()).unwrap();
            let f1 = CliffordFrame::from_circuit(&Circuit::from_gates(5, g1).unwrap()).unwrap();
            let f2 = CliffordFrame::from_circuit(&Circuit::from_gates(5, g2).unwrap()).unwrap();
            let nested = f1.conjugate(&f2.conjugate(&p).unwrap()).unwrap();
            prop_assert_eq!(f12.conjugate(&p).unwrap(), nested);
        }
    }

    #[test]
    fn rejects_rz() {
        let mut f = CliffordFrame::identity(1);
        assert!(matches!(f.prepend_gate(&Gate::Rz(0, 0.2)), Err(Error::NotClifford(_))));
    }
}
