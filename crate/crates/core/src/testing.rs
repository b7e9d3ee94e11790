//! Adapters from crate types to the dense reference oracle.

pub mod dense {
    pub use hamforge_oracle::{
        commutator_is_zero, dagger, expectation, expm_hermitian, hermitian_eigenvalues, kron_paulis,
        pauli_matrix as pauli_matrix_letters, pauli_rotation, pauli_sum_matrix, phase_adjusted_distance, Mat,
    };
    use num_complex::Complex64;

    use crate::circuit::{Circuit, Gate};

    pub fn gate_spec(g: &Gate) -> (String, Vec<usize>, f64) {
        let angle = if let Gate::Rz(_, phi) = g { *phi } else { 0.0 };
        (g.name().to_string(), g.qubits().collect(), angle)
    }

    pub fn gate_matrix(g: &Gate, n: usize) -> Mat {
        let (name, qubits, angle) = gate_spec(g);
        hamforge_oracle::gate_matrix(&name, &qubits, angle, n)
    }

    pub fn circuit_matrix(c: &Circuit) -> Mat {
        let specs: Vec<_> = c.gates().iter().map(gate_spec).collect();
        hamforge_oracle::circuit_unitary(c.num_qubits(), &specs)
    }

    pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
        a * b
    }

    pub fn scale(a: &Mat, s: Complex64) -> Mat {
        a * s
    }

    pub fn mat_close(a: &Mat, b: &Mat, tol: f64) -> bool {
        (a - b).norm() < tol
    }
}
