//! Brute-force dense reference computations.
//!
//! Everything here is built from explicit Kronecker products and Hermitian
//! eigendecompositions, and takes plain letters, gate names and matrices as
//! input so it shares no code with the crates it checks.
//!
//! Basis convention: qubit `q` is bit `q` of the basis index, so an n-qubit
//! operator is `P_{n-1} ⊗ ... ⊗ P_1 ⊗ P_0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type Mat = DMatrix<Complex64>;
pub type Vector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Mat {
    Mat::identity(dim, dim)
}

pub fn pauli_2x2(letter: char) -> Mat {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match letter {
        'I' => Mat::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => Mat::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => Mat::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => Mat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("not a Pauli letter: {letter}"),
    }
}

/// `letters[q]` acts on qubit `q`.
pub fn kron_paulis(letters: &[char]) -> Mat {
    let mut m = identity(1);
    for &l in letters {
        m = pauli_2x2(l).kronecker(&m);
    }
    m
}

pub fn pauli_matrix(letters: &str) -> Mat {
    kron_paulis(&letters.chars().collect::<Vec<_>>())
}

/// Weighted sum of Pauli words given as letter strings.
pub fn pauli_sum_matrix(n: usize, terms: &[(f64, String)]) -> Mat {
    let mut m = Mat::zeros(1 << n, 1 << n);
    for (coeff, letters) in terms {
        m += pauli_matrix(letters) * c(*coeff, 0.0);
    }
    m
}

pub fn one_qubit_gate(name: &str, angle: f64) -> Mat {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let h = 1.0 / 2f64.sqrt();
    match name {
        "h" => Mat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
        "s" => Mat::from_row_slice(2, 2, &[o, z, z, i]),
        "sdg" => Mat::from_row_slice(2, 2, &[o, z, z, -i]),
        "x" => pauli_2x2('X'),
        "y" => pauli_2x2('Y'),
        "z" => pauli_2x2('Z'),
        "rz" => Mat::from_row_slice(
            2,
            2,
            &[Complex64::from_polar(1.0, -angle / 2.0), z, z, Complex64::from_polar(1.0, angle / 2.0)],
        ),
        _ => panic!("unknown one-qubit gate {name}"),
    }
}

/// Full `2^n` matrix of a one- or two-qubit gate, built entry by entry.
pub fn gate_matrix(name: &str, qubits: &[usize], angle: f64, n: usize) -> Mat {
    let dim = 1usize << n;
    match qubits {
        [q] => {
            let u = one_qubit_gate(name, angle);
            let mut letters_factors: Vec<Mat> = (0..n).map(|_| identity(2)).collect();
            letters_factors[*q] = u;
            let mut m = identity(1);
            for f in &letters_factors {
                m = f.kronecker(&m);
            }
            m
        }
        [a, b] => {
            let mut m = Mat::zeros(dim, dim);
            for col in 0..dim {
                let row = match name {
                    "cx" => {
                        if (col >> a) & 1 == 1 {
                            col ^ (1 << b)
                        } else {
                            col
                        }
                    }
                    "swap" => {
                        let (ba, bb) = ((col >> a) & 1, (col >> b) & 1);
                        (col & !(1 << a) & !(1 << b)) | (bb << a) | (ba << b)
                    }
                    _ => panic!("unknown two-qubit gate {name}"),
                };
                m[(row, col)] = c(1.0, 0.0);
            }
            m
        }
        _ => panic!("gate must act on one or two qubits"),
    }
}

/// Product of gate matrices in time order (first gate applied first).
pub fn circuit_unitary(n: usize, gates: &[(String, Vec<usize>, f64)]) -> Mat {
    let mut u = identity(1 << n);
    for (name, qubits, angle) in gates {
        u = gate_matrix(name, qubits, *angle, n) * u;
    }
    u
}

pub fn dagger(m: &Mat) -> Mat {
    m.adjoint()
}

/// Sorted real eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &Mat) -> Vec<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// `exp(-i H t)` through the eigendecomposition of Hermitian `H`.
pub fn expm_hermitian(h: &Mat, t: f64) -> Mat {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.clone();
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        h.nrows(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
    ));
    &v * phases * v.adjoint()
}

/// `exp(-i theta P)` for a Pauli word, from `cos(theta) I - i sin(theta) P`.
pub fn pauli_rotation(letters: &str, theta: f64) -> Mat {
    let p = pauli_matrix(letters);
    let dim = p.nrows();
    identity(dim) * c(theta.cos(), 0.0) - p * c(0.0, theta.sin())
}

pub fn spectral_norm(m: &Mat) -> f64 {
    let svd = SVD::new(m.clone(), false, false);
    svd.singular_values.iter().fold(0.0, |acc: f64, &s| acc.max(s))
}

/// `min_phi ||a - e^{i phi} b||_F`.
pub fn phase_adjusted_distance(a: &Mat, b: &Mat) -> f64 {
    let overlap: Complex64 = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    (a - b * phase).norm()
}

pub fn commutator_is_zero(a: &Mat, b: &Mat) -> bool {
    (a * b - b * a).norm() < 1e-12
}

pub fn expectation(op: &Mat, state: &Vector) -> Complex64 {
    (state.adjoint() * op * state)[(0, 0)]
}

pub fn basis_state(n: usize, index: usize) -> Vector {
    let mut v = Vector::zeros(1 << n);
    v[index] = c(1.0, 0.0);
    v
}

/// Real least-squares fit `X beta ≈ y` (no intercept) via SVD.
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let rows = x.len();
    let cols = x[0].len();
    let a = DMatrix::from_fn(rows, cols, |i, j| x[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = SVD::new(a, true, true);
    svd.solve(&b, 1e-12).expect("svd solve").iter().copied().collect()
}

/// Matrix of the one-qubit word produced by a sequence of named gates.
pub fn word_unitary(names: &[(&str, f64)]) -> Mat {
    let mut u = identity(2);
    for (name, angle) in names {
        u = one_qubit_gate(name, *angle) * u;
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_order_puts_qubit_zero_in_low_bit() {
        // X on qubit 0 flips bit 0
        let m = pauli_matrix("XI");
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        assert_eq!(m[(2, 0)], c(0.0, 0.0));
    }

    #[test]
    fn cx_matrix_flips_target_when_control_set() {
        let m = gate_matrix("cx", &[0, 1], 0.0, 2);
        // |q0=1,q1=0> = index 1 -> |q0=1,q1=1> = index 3
        assert_eq!(m[(3, 1)], c(1.0, 0.0));
        assert_eq!(m[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn expm_matches_rotation_formula() {
        let h = pauli_matrix("XY");
        let u = expm_hermitian(&h, 0.37);
        assert!((u - pauli_rotation("XY", 0.37)).norm() < 1e-12);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let a = pauli_matrix("XZ");
        let b = &a * Complex64::from_polar(1.0, 0.9);
        assert!(phase_adjusted_distance(&a, &b) < 1e-12);
        assert!(phase_adjusted_distance(&a, &pauli_matrix("ZX")) > 1.0);
    }
}
