//! Matrix rearrangements and the trace norms behind the PPT and CCNR
//! criteria.
//!
//! Both criteria compare the trace norm of a rearranged density matrix to 1:
//! separable states satisfy `||T_A(rho)|| = 1` and `||R(rho)|| <= 1`.

use crate::matrix::{singular_values, CMatrix};
use crate::qstate::{BipartiteDims, DensityMatrix};
use crate::tol;

/// Which entry-shuffle produced a [`RearrangedMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RearrangeKind {
    /// Transposition of the A indices; square and Hermitian.
    PartialTranspose,
    /// Row-wise vectorization of the `n x n` blocks; `m^2 x n^2`, generally
    /// neither square nor Hermitian.
    Realignment,
}

/// A rearranged density matrix together with its provenance.
#[derive(Debug, Clone)]
pub struct RearrangedMatrix {
    pub kind: RearrangeKind,
    pub mat: CMatrix,
    pub source_dims: BipartiteDims,
}

/// Partial transpose on subsystem A of a raw matrix:
/// `(T_A rho)_{(i,k),(j,l)} = rho_{(j,k),(i,l)}`.
pub fn partial_transpose_mat(mat: &CMatrix, dims: BipartiteDims) -> CMatrix {
    let (m, n) = (dims.m(), dims.n());
    let d = m * n;
    debug_assert_eq!(mat.nrows(), d);
    CMatrix::from_fn(d, d, |row, col| {
        let (i, k) = (row / n, row % n);
        let (j, l) = (col / n, col % n);
        mat[(j * n + k, i * n + l)]
    })
}

/// Partial transpose of a density matrix; Hermitian with unit trace.
pub fn partial_transpose(rho: &DensityMatrix) -> RearrangedMatrix {
    RearrangedMatrix {
        kind: RearrangeKind::PartialTranspose,
        mat: partial_transpose_mat(rho.mat(), rho.dims()),
        source_dims: rho.dims(),
    }
}

/// Realignment of a raw matrix: `R_{(i,j),(k,l)} = rho_{(i,k),(j,l)}` with
/// rows indexed by A-index pairs `(i, j)` and columns by B-index pairs
/// `(k, l)`; row `(i, j)` is the row-major vectorization of block `(i, j)` of
/// `rho` viewed as an `m x m` grid of `n x n` blocks.
pub fn realign_mat(mat: &CMatrix, dims: BipartiteDims) -> CMatrix {
    let (m, n) = (dims.m(), dims.n());
    debug_assert_eq!(mat.nrows(), m * n);
    CMatrix::from_fn(m * m, n * n, |row, col| {
        let (i, j) = (row / m, row % m);
        let (k, l) = (col / n, col % n);
        mat[(i * n + k, j * n + l)]
    })
}

/// Realignment of a density matrix.
pub fn realign(rho: &DensityMatrix) -> RearrangedMatrix {
    RearrangedMatrix {
        kind: RearrangeKind::Realignment,
        mat: realign_mat(rho.mat(), rho.dims()),
        source_dims: rho.dims(),
    }
}

/// Trace norm: the sum of the singular values.
pub fn trace_norm(mat: &CMatrix) -> f64 {
    singular_values(mat).iter().sum()
}

/// `||T_A(rho)||`; exceeds 1 only for entangled states.
pub fn ppt_value(rho: &DensityMatrix) -> f64 {
    trace_norm(&partial_transpose(rho).mat)
}

/// `||R(rho)||`; exceeds 1 only for entangled states.
pub fn ccnr_value(rho: &DensityMatrix) -> f64 {
    trace_norm(&realign(rho).mat)
}

/// Detection verdict shared by both rearrangement criteria.
pub fn norm_detects(value: f64) -> bool {
    value > 1.0 + tol::DETECT
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, cr, hermiticity_defect, max_abs};
    use crate::qstate::{
        bell, figure1, random_ginibre_with, random_separable_with, tiles_upb,
    };
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partial_transpose_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_ginibre_with(2, 3, &mut rng).unwrap();
        let once = partial_transpose_mat(rho.mat(), rho.dims());
        let twice = partial_transpose_mat(&once, rho.dims());
        // Entries are moved, never recomputed, so the round trip is exact.
        assert_eq!(&twice, rho.mat());
    }

    #[test]
    fn partial_transpose_is_hermitian_with_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_ginibre_with(3, 3, &mut rng).unwrap();
        let pt = partial_transpose(&rho);
        assert!(hermiticity_defect(&pt.mat) < 1e-12);
        assert_relative_eq!(pt.mat.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn realignment_preserves_frobenius_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_ginibre_with(2, 3, &mut rng).unwrap();
        let r = realign(&rho);
        assert_eq!((r.mat.nrows(), r.mat.ncols()), (4, 9));
        assert!((r.mat.norm() - rho.mat().norm()).abs() < 1e-12);
    }

    #[test]
    fn bell_state_norms() {
        let rho = bell(2).unwrap();
        // Partially transposed Bell has eigenvalues {1/2, 1/2, 1/2, -1/2}.
        assert_relative_eq!(ppt_value(&rho), 2.0, epsilon = 1e-10);
        // Realignment of the Bell projector is I/2: four singular values 1/2.
        let r = realign(&rho);
        assert!(max_abs(&(&r.mat - CMatrix::identity(4, 4).scale(0.5))) < 1e-12);
        assert_relative_eq!(ccnr_value(&rho), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn trace_norm_basics() {
        assert_relative_eq!(trace_norm(&CMatrix::identity(5, 5)), 5.0, epsilon = 1e-10);
        let diag = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]);
        assert_relative_eq!(trace_norm(&diag), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_matches_augmented_eigenvalue_oracle() {
        // Independent route: the Hermitian block matrix [[0, A], [A^+, 0]]
        // has eigenvalues +-sigma_i (padded with zeros), so its positive
        // spectrum recovers the singular values without squaring them.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = CMatrix::from_fn(4, 9, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let (rows, cols) = (a.nrows(), a.ncols());
        let dim = rows + cols;
        let mut augmented = CMatrix::zeros(dim, dim);
        for i in 0..rows {
            for j in 0..cols {
                augmented[(i, rows + j)] = a[(i, j)];
                augmented[(rows + j, i)] = a[(i, j)].conj();
            }
        }
        let oracle: f64 = crate::matrix::hermitian_eigenvalues(&augmented)
            .iter()
            .filter(|&&v| v > 0.0)
            .sum();
        assert_relative_eq!(trace_norm(&a), oracle, epsilon = 1e-10);
    }

    #[test]
    fn trace_norm_of_hermitian_matches_absolute_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = random_ginibre_with(2, 2, &mut rng).unwrap();
        let pt = partial_transpose(&rho).mat;
        let eig_route: f64 =
            crate::matrix::hermitian_eigenvalues(&pt).iter().map(|v| v.abs()).sum();
        assert_relative_eq!(trace_norm(&pt), eig_route, epsilon = 1e-10);
    }

    #[test]
    fn separable_states_stay_below_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for &(m, n) in &[(2usize, 2usize), (2, 3), (3, 3)] {
            let dims = BipartiteDims::new(m, n).unwrap();
            for _ in 0..40 {
                let rho = random_separable_with(dims, 4, &mut rng);
                assert!(ppt_value(&rho) <= 1.0 + 1e-9);
                assert!(ccnr_value(&rho) <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn figure1_pure_limit_has_both_norms_two() {
        let rho = figure1(1.0).unwrap();
        assert_relative_eq!(ppt_value(&rho), 2.0, epsilon = 1e-9);
        assert_relative_eq!(ccnr_value(&rho), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn tiles_is_ppt_but_ccnr_detected() {
        let rho = tiles_upb();
        assert_relative_eq!(ppt_value(&rho), 1.0, epsilon = 1e-9);
        let ccnr = ccnr_value(&rho);
        assert!(norm_detects(ccnr));
        // Cross-checked against an independent SVD of the realigned matrix.
        assert_relative_eq!(ccnr, 1.087412464837521, epsilon = 1e-9);
    }

    #[test]
    fn pure_state_norms_match_schmidt_cross_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &(m, n) in &[(2usize, 2usize), (2, 3), (3, 3)] {
            let dims = BipartiteDims::new(m, n).unwrap();
            for _ in 0..20 {
                let psi = crate::qstate::random_pure_with(dims, &mut rng);
                let sqrt_sum: f64 =
                    psi.schmidt().coefficients.iter().map(|&mu| mu.max(0.0).sqrt()).sum();
                let expect = sqrt_sum * sqrt_sum;
                let rho = psi.to_density();
                assert_relative_eq!(ppt_value(&rho), expect, epsilon = 1e-9);
                assert_relative_eq!(ccnr_value(&rho), expect, epsilon = 1e-9);
            }
        }
    }
}
