//! Separability criteria: the two-sided local uncertainty condition on LOO
//! pairs and the Bloch correlation-matrix condition, plus the criterion
//! results for the rearrangement norms.
//!
//! For separable states the uncertainty sum obeys
//! `sum_i Var(G_i^A ⊗ I + I ⊗ G_i^B) >= m + n - 2`, and the correlation
//! matrix obeys `||T|| <= K_mn = sqrt(m n (m-1)(n-1)) / 2`; a violation of
//! either certifies entanglement.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::loo::{gellmann, LooPair};
use crate::matrix::CMatrix;
use crate::qstate::{BipartiteDims, DensityMatrix};
use crate::rearrange::{ccnr_value, ppt_value};
use crate::tol;

/// Which separability criterion produced a [`CriterionResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    Ppt,
    Ccnr,
    LocalUncertainty,
    CorrelationMatrix,
}

/// Measured criterion value together with its separable threshold and the
/// detection verdict.
#[derive(Debug, Clone, Copy)]
pub struct CriterionResult {
    pub kind: CriterionKind,
    pub value: f64,
    pub threshold: f64,
    /// For the uncertainty criterion detection means `value < threshold`,
    /// for the others `value > threshold` (with a `tol::DETECT` margin).
    pub detected: bool,
}

fn complex_expectation(rho: &CMatrix, obs: &CMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..rho.nrows() {
        for k in 0..rho.ncols() {
            acc += rho[(i, k)] * obs[(k, i)];
        }
    }
    acc
}

/// Variance `<O^2> - <O>^2` of a Hermitian observable on a raw density
/// matrix; tiny negative round-off is clamped to zero.
pub fn variance_of(rho: &CMatrix, obs: &CMatrix) -> f64 {
    debug_assert_eq!(rho.nrows(), obs.nrows());
    let mean = complex_expectation(rho, obs).re;
    let second = complex_expectation(rho, &(obs * obs)).re;
    (second - mean * mean).max(0.0)
}

/// Variance on a validated state, with dimension checking.
pub fn variance(rho: &DensityMatrix, obs: &CMatrix) -> Result<f64> {
    let d = rho.dims().total();
    if obs.nrows() != d || obs.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "observable is {}x{}, state needs {d}x{d}",
            obs.nrows(),
            obs.ncols()
        )));
    }
    Ok(variance_of(rho.mat(), obs))
}

/// PPT criterion: `||T_A(rho)||` against threshold 1.
pub fn ppt_criterion(rho: &DensityMatrix) -> CriterionResult {
    let value = ppt_value(rho);
    CriterionResult {
        kind: CriterionKind::Ppt,
        value,
        threshold: 1.0,
        detected: value > 1.0 + tol::DETECT,
    }
}

/// CCNR criterion: `||R(rho)||` against threshold 1.
pub fn ccnr_criterion(rho: &DensityMatrix) -> CriterionResult {
    let value = ccnr_value(rho);
    CriterionResult {
        kind: CriterionKind::Ccnr,
        value,
        threshold: 1.0,
        detected: value > 1.0 + tol::DETECT,
    }
}

fn check_pair_dims(rho: &DensityMatrix, pair: &LooPair) -> Result<()> {
    if pair.dims() != rho.dims() {
        return Err(Error::DimensionMismatch(format!(
            "pair is for ({}, {}), state is ({}, {})",
            pair.dims().m(),
            pair.dims().n(),
            rho.dims().m(),
            rho.dims().n()
        )));
    }
    Ok(())
}

/// Two-sided uncertainty sum `sum_i Var(G_i^A ⊗ I + I ⊗ G_i^B)` evaluated
/// term by term, with threshold `m + n - 2`.
pub fn lurs_value(rho: &DensityMatrix, pair: &LooPair) -> Result<CriterionResult> {
    check_pair_dims(rho, pair)?;
    let (m, n) = (rho.dims().m(), rho.dims().n());
    let eye_a = CMatrix::identity(m, m);
    let eye_b = CMatrix::identity(n, n);
    let mut value = 0.0;
    for (i, b) in pair.set_b().mats().iter().enumerate() {
        let joint = match pair.a_at(i) {
            Some(a) => a.kronecker(&eye_b) + eye_a.kronecker(b),
            None => eye_a.kronecker(b),
        };
        value += variance_of(rho.mat(), &joint);
    }
    let threshold = (m + n) as f64 - 2.0;
    Ok(CriterionResult {
        kind: CriterionKind::LocalUncertainty,
        value,
        threshold,
        detected: value < threshold - tol::DETECT,
    })
}

/// The algebraically equivalent closed form of the uncertainty sum,
/// `m + n + 2 sum_i <G_i^A ⊗ G_i^B> - sum_i <G_i^A ⊗ I + I ⊗ G_i^B>^2`,
/// which follows from the completeness identity of both sets. Agrees with
/// [`lurs_value`] to round-off; used where many evaluations are needed.
pub fn lurs_sum_closed_form(rho: &DensityMatrix, pair: &LooPair) -> Result<f64> {
    check_pair_dims(rho, pair)?;
    let (m, n) = (rho.dims().m(), rho.dims().n());
    let rho_a = rho.partial_trace_b();
    let rho_b = rho.partial_trace_a();
    let mut cross = 0.0;
    let mut locals = 0.0;
    for (i, b) in pair.set_b().mats().iter().enumerate() {
        let mean_b = complex_expectation(&rho_b, b).re;
        match pair.a_at(i) {
            Some(a) => {
                cross += complex_expectation(rho.mat(), &a.kronecker(b)).re;
                let mean_a = complex_expectation(&rho_a, a).re;
                locals += (mean_a + mean_b) * (mean_a + mean_b);
            }
            None => locals += mean_b * mean_b,
        }
    }
    Ok((m + n) as f64 + 2.0 * cross - locals)
}

/// Bloch representation of a bipartite state: local vectors `r`, `s` and the
/// real correlation matrix `T` with `t_ij = (m n / 4) <lambda_i^A ⊗ lambda_j^B>`,
/// generators in the canonical order of [`gellmann`].
#[derive(Debug, Clone)]
pub struct BlochDecomposition {
    pub r: DVector<f64>,
    pub s: DVector<f64>,
    pub t: DMatrix<f64>,
}

impl BlochDecomposition {
    /// Rebuilds the density matrix
    /// `(1/mn) (I + sum r_i lambda_i ⊗ I + sum s_j I ⊗ lambda_j + sum t_ij lambda_i ⊗ lambda_j)`.
    pub fn reconstruct(&self, dims: BipartiteDims) -> CMatrix {
        let (m, n) = (dims.m(), dims.n());
        let gens_a = gellmann(m);
        let gens_b = gellmann(n);
        let eye_a = CMatrix::identity(m, m);
        let eye_b = CMatrix::identity(n, n);
        let mut mat = eye_a.kronecker(&eye_b);
        for (i, la) in gens_a.mats().iter().enumerate() {
            mat += la.kronecker(&eye_b).scale(self.r[i]);
        }
        for (j, lb) in gens_b.mats().iter().enumerate() {
            mat += eye_a.kronecker(lb).scale(self.s[j]);
        }
        for (i, la) in gens_a.mats().iter().enumerate() {
            for (j, lb) in gens_b.mats().iter().enumerate() {
                mat += la.kronecker(lb).scale(self.t[(i, j)]);
            }
        }
        mat.scale(1.0 / dims.total() as f64)
    }
}

/// Bloch decomposition of a state. Fails with a diagnostics error if any
/// coefficient carries an imaginary residue beyond `1e-10`, which signals an
/// invalid state or generator set.
pub fn bloch(rho: &DensityMatrix) -> Result<BlochDecomposition> {
    let (m, n) = (rho.dims().m(), rho.dims().n());
    let gens_a = gellmann(m);
    let gens_b = gellmann(n);
    let rho_a = rho.partial_trace_b();
    let rho_b = rho.partial_trace_a();

    let mut imag_max = 0.0_f64;
    let mut real_checked = |z: Complex64| -> f64 {
        imag_max = imag_max.max(z.im.abs());
        z.re
    };

    let r = DVector::from_iterator(
        gens_a.len(),
        gens_a
            .mats()
            .iter()
            .map(|la| real_checked(complex_expectation(&rho_a, la)) * m as f64 / 2.0),
    );
    let s = DVector::from_iterator(
        gens_b.len(),
        gens_b
            .mats()
            .iter()
            .map(|lb| real_checked(complex_expectation(&rho_b, lb)) * n as f64 / 2.0),
    );
    let scale_t = (m * n) as f64 / 4.0;
    let t = DMatrix::from_fn(gens_a.len(), gens_b.len(), |i, j| {
        let kron = gens_a.mats()[i].kronecker(&gens_b.mats()[j]);
        real_checked(complex_expectation(rho.mat(), &kron)) * scale_t
    });
    if imag_max > 1e-10 {
        return Err(Error::Numerics(format!(
            "Bloch coefficients have imaginary residue {imag_max:.3e}"
        )));
    }
    Ok(BlochDecomposition { r, s, t })
}

/// Separable ceiling for the correlation matrix norm,
/// `K_mn = sqrt(m n (m-1)(n-1)) / 2`.
pub fn cm_threshold(dims: BipartiteDims) -> f64 {
    let (m, n) = (dims.m() as f64, dims.n() as f64);
    (m * n * (m - 1.0) * (n - 1.0)).sqrt() / 2.0
}

/// Correlation-matrix criterion: `||T||` against `K_mn`.
pub fn cm_value(rho: &DensityMatrix) -> Result<CriterionResult> {
    let decomposition = bloch(rho)?;
    let value: f64 = decomposition.t.clone().singular_values().iter().sum();
    let threshold = cm_threshold(rho.dims());
    Ok(CriterionResult {
        kind: CriterionKind::CorrelationMatrix,
        value,
        threshold,
        detected: value > threshold + tol::DETECT,
    })
}
