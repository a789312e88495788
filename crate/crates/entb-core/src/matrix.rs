//! Dense complex matrices and the small numerical helpers shared by every
//! module: Hermitian eigendecompositions, singular values, Kronecker products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dynamically sized complex matrix, the working representation throughout.
pub type CMatrix = DMatrix<Complex64>;
/// Dynamically sized complex column vector.
pub type CVector = DVector<Complex64>;

/// Shorthand complex constructor.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real number as a complex scalar.
#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Standard basis ket `|j>` in the given dimension.
pub fn ket(dim: usize, j: usize) -> CVector {
    assert!(j < dim, "basis index {j} out of range for dimension {dim}");
    let mut v = CVector::zeros(dim);
    v[j] = cr(1.0);
    v
}

/// Rank-one operator `|a><b|`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Kronecker (tensor) product of two vectors, `(a ⊗ b)[i*n + k] = a[i] b[k]`.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for k in 0..b.len() {
            out[i * b.len() + k] = a[i] * b[k];
        }
    }
    out
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry-wise deviation from Hermiticity, `max |m - m^dagger|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut defect = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues in descending order
/// with matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| se.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values
}

/// Singular values of an arbitrary complex matrix, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().singular_values().iter().copied().collect()
}
