//! Bundled sample inputs.
//!
//! The molecular sample is H2 in a minimal STO-3G basis at a bond length of
//! 1.4 bohr (two spatial orbitals, four spin-orbitals, two electrons), using
//! the textbook integral values in the molecular-orbital basis.

use crate::error::Result;
use crate::fermion::{map_jordan_wigner, HartreeFockState, MolecularIntegrals};
use crate::pauli::PauliSum;
use crate::transpile::CouplingGraph;

pub const H2_INTEGRALS_JSON: &str = include_str!("../data/h2_sto3g_integrals.json");
pub const H2_HAMILTONIAN_JSON: &str = include_str!("../data/h2_sto3g_jw.json");
pub const H2_H_EFF_CSV: &str = include_str!("../data/h2_h_eff.csv");
pub const HEAVY_HEX_156: &str = include_str!("../data/heavy_hex_156.txt");

const H2_BOND_LENGTH: f64 = 1.4;
const H2_CORE: [[f64; 2]; 2] = [[-1.2528, 0.0], [0.0, -0.4756]];
const H2_ERI: [(usize, usize, usize, usize, f64); 4] =
    [(0, 0, 0, 0, 0.6746), (1, 1, 1, 1, 0.6975), (0, 0, 1, 1, 0.6636), (0, 1, 0, 1, 0.1813)];

/// Spin-orbital integrals of the H2 sample, built from the spatial values.
pub fn h2_integrals() -> MolecularIntegrals {
    let core: Vec<Vec<f64>> = H2_CORE.iter().map(|r| r.to_vec()).collect();
    MolecularIntegrals::from_spatial_chemist(2, 1.0 / H2_BOND_LENGTH, &core, &H2_ERI)
        .expect("bundled integrals are well formed")
}

/// Jordan-Wigner qubit Hamiltonian of the H2 sample (4 qubits).
pub fn h2_hamiltonian() -> PauliSum {
    PauliSum::from_json_str(H2_HAMILTONIAN_JSON).expect("bundled Hamiltonian parses")
}

/// One-electron block of the H2 sample in the spin-orbital basis, used as
/// the effective one-body weight of the temporal observable.
pub fn h2_h_eff() -> Vec<Vec<f64>> {
    H2_H_EFF_CSV
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().expect("bundled CSV is numeric")).collect())
        .collect()
}

pub fn h2_hartree_fock() -> HartreeFockState {
    HartreeFockState::lowest(4, 2).expect("2 electrons in 4 spin-orbitals")
}

/// 156-qubit heavy-hex coupling graph.
pub fn heavy_hex_156() -> CouplingGraph {
    CouplingGraph::parse(HEAVY_HEX_156).expect("bundled coupling map parses")
}

/// Regenerates the Hamiltonian file contents from the integrals.
pub fn h2_hamiltonian_from_integrals() -> Result<PauliSum> {
    map_jordan_wigner(&h2_integrals().to_fermionic_operator()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::dense;

    /// `E = E0 + Σ_occ h_ii + Σ_{i != j occ} (h_ijji - h_ijij)`.
    fn hf_energy(ints: &MolecularIntegrals, occ: &[usize]) -> f64 {
        let mut e = ints.constant;
        for &i in occ {
            e += ints.one_body[i][i];
        }
        for &(i, j, k, l, v) in &ints.two_body {
            if i != j && occ.contains(&i) && occ.contains(&j) {
                if k == j && l == i {
                    e += v;
                } else if k == i && l == j {
                    e -= v;
                }
            }
        }
        e
    }

    #[test]
    fn bundled_files_match_generators() {
        assert_eq!(MolecularIntegrals::from_json_str(H2_INTEGRALS_JSON).unwrap(), h2_integrals());
        let regenerated = h2_hamiltonian_from_integrals().unwrap();
        let bundled = h2_hamiltonian();
        assert_eq!(bundled.len(), regenerated.len());
        for (a, b) in bundled.iter().zip(regenerated.iter()) {
            assert_eq!(a.pauli, b.pauli);
            assert!((a.coeff - b.coeff).abs() < 1e-15);
        }
        let h = h2_h_eff();
        assert_eq!(h, h2_integrals().one_body);
    }

    #[test]
    fn hartree_fock_energy_matches_closed_shell_formula() {
        let ints = h2_integrals();
        let psi = crate::sim::apply_circuit(
            &crate::fermion::hf_circuit(&h2_hartree_fock(), crate::fermion::Mapping::JordanWigner),
            &crate::sim::StateVector::zero(4).unwrap(),
        )
        .unwrap();
        let e = crate::sim::expectation(&h2_hamiltonian(), &psi).unwrap();
        assert!((e - hf_energy(&ints, &[0, 1])).abs() < 1e-12);
        // closed shell: 2 h11 + (11|11) + 1/R
        let closed = 2.0 * H2_CORE[0][0] + H2_ERI[0].4 + 1.0 / H2_BOND_LENGTH;
        assert!((e - closed).abs() < 1e-12);
        assert!((e + 1.1167).abs() < 5e-4);
    }

    #[test]
    fn ground_state_energy_is_full_ci_value() {
        let h = h2_hamiltonian();
        let terms: Vec<(f64, String)> = h.iter().map(|t| (t.coeff, t.pauli.letters())).collect();
        let evals = dense::hermitian_eigenvalues(&dense::pauli_sum_matrix(4, &terms));
        assert!((evals[0] + 1.1373).abs() < 1e-3, "{}", evals[0]);
    }

    #[test]
    fn heavy_hex_graph_shape() {
        let g = heavy_hex_156();
        assert_eq!(g.num_qubits(), 156);
        assert!(g.is_connected());
        assert!(g.edges().iter().all(|&(a, b)| a != b));
        let max_degree = (0..156).map(|q| g.neighbors(q).len()).max().unwrap();
        assert_eq!(max_degree, 3);
    }
}
