//! Dense matrix forms built by Kronecker products. Only practical for small
//! qubit counts; used as an independent check on the matrix-free engines.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum};

/// Largest qubit count accepted by the dense routines.
pub const MAX_DENSE_QUBITS: usize = 12;

fn letter_matrix(letter: Letter) -> DMatrix<Complex64> {
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    match letter {
        Letter::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        Letter::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        Letter::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Letter::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    }
}

/// `P_0 ⊗ P_1 ⊗ … ⊗ P_{n-1}`, so qubit 0 is the most significant index bit.
pub fn pauli_matrix(p: &PauliString) -> DMatrix<Complex64> {
    p.letters()
        .into_iter()
        .fold(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), |acc, l| acc.kronecker(&letter_matrix(l)))
}

pub fn sum_matrix(sum: &PauliSum) -> Result<DMatrix<Complex64>> {
    let n = sum.num_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits { requested: n, max: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (p, c) in sum.sorted_terms() {
        m += pauli_matrix(&p) * Complex64::new(c, 0.0);
    }
    Ok(m)
}

pub fn commutator_is_zero(p: &PauliString, g: &PauliString) -> bool {
    let (a, b) = (pauli_matrix(p), pauli_matrix(g));
    (&a * &b - &b * &a).norm() < 1e-12
}

/// Lowest eigenvalue by full dense diagonalization.
pub fn dense_ground_state_energy(sum: &PauliSum) -> Result<f64> {
    let m = sum_matrix(sum)?;
    let eig = SymmetricEigen::new(m);
    eig.eigenvalues.iter().copied().min_by(f64::total_cmp).ok_or(Error::EmptyInput("Hamiltonian matrix"))
}
