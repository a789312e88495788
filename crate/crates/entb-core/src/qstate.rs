//! Bipartite quantum states: validated density matrices, pure states,
//! partial traces, Schmidt decompositions, pure-state concurrence, and the
//! example families used throughout the test suite and CLI.
//!
//! All bound formulas assume the subsystem ordering `m <= n`; constructors
//! relabel the subsystems automatically when given `m > n` and record the
//! swap, since every bound is symmetric under relabeling while the formulas
//! are not.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result, Violation};
use crate::matrix::{
    cr, hermitian_eigen, hermitian_eigenvalues, hermiticity_defect, ket, kron_vec, outer,
    CMatrix, CVector,
};
use crate::tol;

/// Dimensions `(m, n)` of a bipartite system, kept in canonical order `m <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteDims {
    m: usize,
    n: usize,
}

impl BipartiteDims {
    /// Canonical dimensions; both must be at least 2 and `m <= n`.
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions must be at least 2, got ({m}, {n})"
            )));
        }
        if m > n {
            return Err(Error::DimensionMismatch(format!(
                "canonical orientation requires m <= n, got ({m}, {n}); \
                 construct the state through DensityMatrix/PureState to auto-swap"
            )));
        }
        Ok(Self { m, n })
    }

    /// Orders `(m, n)` canonically; the flag reports whether a swap was needed.
    pub fn canonical(m: usize, n: usize) -> Result<(Self, bool)> {
        if m > n {
            Ok((Self::new(n, m)?, true))
        } else {
            Ok((Self::new(m, n)?, false))
        }
    }

    /// Dimension of subsystem A (the smaller one).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Dimension of subsystem B.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total Hilbert-space dimension `m * n`.
    pub fn total(&self) -> usize {
        self.m * self.n
    }

    /// Largest concurrence attainable in these dimensions,
    /// `sqrt(2 (m - 1) / m)`, reached by maximally entangled states.
    pub fn concurrence_max(&self) -> f64 {
        (2.0 * (self.m as f64 - 1.0) / self.m as f64).sqrt()
    }
}

/// Relabels the subsystems of a matrix on `C^m ⊗ C^n` so it acts on
/// `C^n ⊗ C^m`.
fn swap_subsystems(mat: &CMatrix, m: usize, n: usize) -> CMatrix {
    let d = m * n;
    CMatrix::from_fn(d, d, |row, col| {
        let (k, i) = (row / m, row % m);
        let (l, j) = (col / m, col % m);
        mat[(i * n + k, j * n + l)]
    })
}

/// A validated bipartite density matrix.
///
/// Invariants: Hermitian, unit trace, positive semidefinite (within the
/// [`tol`](crate::tol) tolerances), with basis ordering
/// `|i>_A ⊗ |k>_B -> row i*n + k`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    mat: CMatrix,
    swapped: bool,
}

impl DensityMatrix {
    /// Validates `mat` as a density matrix on `C^m ⊗ C^n`.
    ///
    /// If `m > n` the subsystems are relabeled first (see the module note).
    /// On failure, the error lists every violated invariant with its
    /// magnitude.
    pub fn new(mat: CMatrix, m: usize, n: usize) -> Result<Self> {
        let (dims, swapped) = BipartiteDims::canonical(m, n)?;
        let d = dims.total();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Validation(vec![Violation::DimensionMismatch {
                expected: d,
                rows: mat.nrows(),
                cols: mat.ncols(),
            }]));
        }
        let mat = if swapped { swap_subsystems(&mat, m, n) } else { mat };

        let mut violations = Vec::new();
        let herm = hermiticity_defect(&mat);
        if herm > tol::HERM {
            violations.push(Violation::NotHermitian(herm));
        }
        let trace_defect = (mat.trace() - cr(1.0)).norm();
        if trace_defect > tol::TRACE {
            violations.push(Violation::TraceNotOne(trace_defect));
        }
        // Eigenvalues are only meaningful for near-Hermitian input; check on
        // the Hermitian part to keep the diagnostics well-defined.
        let herm_part = (&mat + mat.adjoint()).scale(0.5);
        let min_eig = hermitian_eigenvalues(&herm_part).last().copied().unwrap_or(0.0);
        if min_eig < -tol::PSD {
            violations.push(Violation::NotPsd(-min_eig));
        }
        if violations.is_empty() {
            Ok(Self { dims, mat, swapped })
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Constructor for matrices that are valid by construction (already in
    /// canonical orientation).
    pub(crate) fn trusted(mat: CMatrix, dims: BipartiteDims, swapped: bool) -> Self {
        Self { dims, mat, swapped }
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// Whether the subsystems were relabeled to reach `m <= n`.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// Reduced state of subsystem A: `(rho_A)_{ij} = sum_k rho_{(i,k),(j,k)}`.
    pub fn partial_trace_b(&self) -> CMatrix {
        let (m, n) = (self.dims.m, self.dims.n);
        CMatrix::from_fn(m, m, |i, j| {
            (0..n).map(|k| self.mat[(i * n + k, j * n + k)]).sum()
        })
    }

    /// Reduced state of subsystem B.
    pub fn partial_trace_a(&self) -> CMatrix {
        let (m, n) = (self.dims.m, self.dims.n);
        CMatrix::from_fn(n, n, |k, l| {
            (0..m).map(|i| self.mat[(i * n + k, i * n + l)]).sum()
        })
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Real expectation value `Tr(rho O)` of a Hermitian observable.
    pub fn expectation(&self, obs: &CMatrix) -> f64 {
        debug_assert_eq!(obs.nrows(), self.mat.nrows());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.mat.nrows() {
            for k in 0..self.mat.ncols() {
                acc += self.mat[(i, k)] * obs[(k, i)];
            }
        }
        acc.re
    }

    /// Spectral decomposition, eigenvalues descending.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.mat)
    }

    /// Eigenvector of the largest eigenvalue, as a pure state.
    pub fn dominant_eigenvector(&self) -> PureState {
        let (_, vecs) = self.eigen();
        let amps = vecs.column(0).into_owned();
        PureState::trusted(amps.normalize(), self.dims)
    }

    /// Number of eigenvalues above `1e-12`.
    pub fn rank(&self) -> usize {
        hermitian_eigenvalues(&self.mat).iter().filter(|&&v| v > 1e-12).count()
    }
}

/// Validates a raw matrix as a density matrix; see [`DensityMatrix::new`].
pub fn validate_density(mat: CMatrix, m: usize, n: usize) -> Result<DensityMatrix> {
    DensityMatrix::new(mat, m, n)
}

/// Invariant magnitudes of a candidate density matrix, reported whether or
/// not they violate the tolerances.
#[derive(Debug, Clone, Copy)]
pub struct DensityDiagnostics {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    /// Most negative eigenvalue of the Hermitian part (non-negative spectrum
    /// gives a small positive value here).
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    pub fn hermitian_ok(&self) -> bool {
        self.hermiticity_defect <= tol::HERM
    }

    pub fn trace_ok(&self) -> bool {
        self.trace_defect <= tol::TRACE
    }

    pub fn psd_ok(&self) -> bool {
        self.min_eigenvalue >= -tol::PSD
    }

    pub fn is_valid(&self) -> bool {
        self.hermitian_ok() && self.trace_ok() && self.psd_ok()
    }
}

/// Measures the density-matrix invariants of `mat` without judging them;
/// fails only on a shape mismatch.
pub fn density_diagnostics(mat: &CMatrix, m: usize, n: usize) -> Result<DensityDiagnostics> {
    let (dims, _) = BipartiteDims::canonical(m, n)?;
    let d = dims.total();
    if mat.nrows() != d || mat.ncols() != d {
        return Err(Error::Validation(vec![Violation::DimensionMismatch {
            expected: d,
            rows: mat.nrows(),
            cols: mat.ncols(),
        }]));
    }
    let herm_part = (mat + mat.adjoint()).scale(0.5);
    Ok(DensityDiagnostics {
        hermiticity_defect: hermiticity_defect(mat),
        trace_defect: (mat.trace() - cr(1.0)).norm(),
        min_eigenvalue: hermitian_eigenvalues(&herm_part).last().copied().unwrap_or(0.0),
    })
}

/// A normalized bipartite pure state with amplitude indexing
/// `|i>_A ⊗ |k>_B -> i*n + k`.
#[derive(Debug, Clone)]
pub struct PureState {
    dims: BipartiteDims,
    amps: CVector,
    swapped: bool,
}

impl PureState {
    pub fn new(amps: CVector, m: usize, n: usize) -> Result<Self> {
        let (dims, swapped) = BipartiteDims::canonical(m, n)?;
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude vector has length {}, expected {}",
                amps.len(),
                dims.total()
            )));
        }
        let norm_defect = (amps.norm() - 1.0).abs();
        if norm_defect > tol::NORM {
            return Err(Error::Numerics(format!(
                "pure state is not normalized (defect {norm_defect:.3e})"
            )));
        }
        let amps = if swapped {
            let mut out = CVector::zeros(amps.len());
            for i in 0..m {
                for k in 0..n {
                    out[k * m + i] = amps[i * n + k];
                }
            }
            out
        } else {
            amps
        };
        Ok(Self { dims, amps, swapped })
    }

    pub(crate) fn trusted(amps: CVector, dims: BipartiteDims) -> Self {
        Self { dims, amps, swapped: false }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// Amplitudes reshaped into the `m x n` coefficient matrix.
    pub fn coefficient_matrix(&self) -> CMatrix {
        let (m, n) = (self.dims.m, self.dims.n);
        CMatrix::from_fn(m, n, |i, k| self.amps[i * n + k])
    }

    /// Projector `|psi><psi|` as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::trusted(outer(&self.amps, &self.amps), self.dims, self.swapped)
    }

    /// Reduced state of subsystem A, computed directly from the amplitudes.
    pub fn reduced_a(&self) -> CMatrix {
        let coeff = self.coefficient_matrix();
        &coeff * coeff.adjoint()
    }

    /// Schmidt decomposition via SVD of the coefficient matrix.
    pub fn schmidt(&self) -> SchmidtDecomposition {
        let (m, _n) = (self.dims.m, self.dims.n);
        let svd = self.coefficient_matrix().svd(true, true);
        let u = svd.u.expect("SVD with vectors requested");
        let v_t = svd.v_t.expect("SVD with vectors requested");
        let coefficients: Vec<f64> =
            svd.singular_values.iter().take(m).map(|s| s * s).collect();
        let basis_a: Vec<CVector> = (0..m).map(|j| u.column(j).into_owned()).collect();
        let basis_b: Vec<CVector> = (0..m).map(|j| v_t.row(j).transpose()).collect();
        SchmidtDecomposition { coefficients, basis_a, basis_b }
    }

    /// Pure-state concurrence `sqrt(2 (1 - Tr rho_A^2))`, clamped to its
    /// mathematical range `[0, sqrt(2(m-1)/m)]`.
    pub fn concurrence(&self) -> f64 {
        let rho_a = self.reduced_a();
        let purity: f64 = rho_a.iter().map(|z| z.norm_sqr()).sum();
        let raw = (2.0 * (1.0 - purity)).max(0.0).sqrt();
        raw.min(self.dims.concurrence_max())
    }
}

/// Pure-state concurrence; see [`PureState::concurrence`].
pub fn pure_concurrence(psi: &PureState) -> f64 {
    psi.concurrence()
}

/// Schmidt data of a pure state: coefficients `mu_j` (descending, summing to
/// one) and the matching local bases.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Squared singular values of the coefficient matrix, descending.
    pub coefficients: Vec<f64>,
    /// `m` orthonormal vectors on subsystem A.
    pub basis_a: Vec<CVector>,
    /// `m` orthonormal vectors on subsystem B (dimension `n`).
    pub basis_b: Vec<CVector>,
}

impl SchmidtDecomposition {
    /// Rebuilds the state `sum_j sqrt(mu_j) |j_A> ⊗ |j_B>`.
    pub fn reconstruct(&self) -> CVector {
        let mut out = CVector::zeros(self.basis_a[0].len() * self.basis_b[0].len());
        for j in 0..self.coefficients.len() {
            out += kron_vec(&self.basis_a[j], &self.basis_b[j])
                .scale(self.coefficients[j].max(0.0).sqrt());
        }
        out
    }

    /// `sum_{j<k} sqrt(mu_j mu_k)`, the cross term entering the LUR and
    /// rearrangement bounds for pure states.
    pub fn sqrt_cross_sum(&self) -> f64 {
        let mu = &self.coefficients;
        let mut acc = 0.0;
        for j in 0..mu.len() {
            for k in (j + 1)..mu.len() {
                acc += (mu[j].max(0.0) * mu[k].max(0.0)).sqrt();
            }
        }
        acc
    }
}

/// Schmidt decomposition of a pure state; see [`PureState::schmidt`].
pub fn schmidt(psi: &PureState) -> SchmidtDecomposition {
    psi.schmidt()
}

// ---------------------------------------------------------------------------
// Example families
// ---------------------------------------------------------------------------

/// Maximally entangled pure state `sum_j |jj> / sqrt(m)` on `m x m`.
pub fn bell_pure(m: usize) -> Result<PureState> {
    let dims = BipartiteDims::new(m, m)?;
    let mut amps = CVector::zeros(dims.total());
    for j in 0..m {
        amps[j * m + j] = cr(1.0 / (m as f64).sqrt());
    }
    Ok(PureState::trusted(amps, dims))
}

/// Maximally entangled state as a density matrix.
pub fn bell(m: usize) -> Result<DensityMatrix> {
    Ok(bell_pure(m)?.to_density())
}

/// The 3x3 bound entangled state built from the five-member "tiles"
/// unextendible product basis: `rho = (I - sum_i |psi_i><psi_i|) / 4`.
/// It is PPT yet entangled.
pub fn tiles_upb() -> DensityMatrix {
    let dims = BipartiteDims::new(3, 3).expect("static dims");
    let k = |j| ket(3, j);
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    let vectors: [CVector; 5] = [
        kron_vec(&k(0), &((k(0) - k(1)).scale(inv_sqrt2))),
        kron_vec(&((k(0) - k(1)).scale(inv_sqrt2)), &k(2)),
        kron_vec(&k(2), &((k(1) - k(2)).scale(inv_sqrt2))),
        kron_vec(&((k(1) - k(2)).scale(inv_sqrt2)), &k(0)),
        kron_vec(
            &((k(0) + k(1) + k(2)).scale(1.0 / 3.0)),
            &(k(0) + k(1) + k(2)),
        ),
    ];
    let mut mat = CMatrix::identity(9, 9);
    for v in &vectors {
        mat -= outer(v, v);
    }
    DensityMatrix::trusted(mat.scale(0.25), dims, false)
}

/// The maximally entangled component of the `figure1` family,
/// `(|00> + |11>) / sqrt(2)` embedded in `2 x 3`.
pub fn figure1_pure() -> PureState {
    let dims = BipartiteDims::new(2, 3).expect("static dims");
    let mut amps = CVector::zeros(6);
    let s = cr(1.0 / 2.0_f64.sqrt());
    amps[0] = s; // |00>
    amps[4] = s; // |11> at row 1*n + 1
    PureState::trusted(amps, dims)
}

/// The `2 x 3` interpolation `p |Psi><Psi| + (1-p) |01><01|` with
/// `Psi = (|00> + |11>) / sqrt(2)`.
pub fn figure1(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadParams(format!("figure1 requires p in [0, 1], got {p}")));
    }
    let dims = BipartiteDims::new(2, 3)?;
    let psi = figure1_pure();
    let e01 = kron_vec(&ket(2, 0), &ket(3, 1));
    let mat = outer(psi.amplitudes(), psi.amplitudes()).scale(p) + outer(&e01, &e01).scale(1.0 - p);
    Ok(DensityMatrix::trusted(mat, dims, false))
}

/// Isotropic state on `m x m` in the fidelity parametrization
/// `F |Phi+><Phi+| + (1-F) (I - |Phi+><Phi+|) / (m^2 - 1)`.
pub fn isotropic(m: usize, fidelity: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::BadParams(format!(
            "isotropic requires F in [0, 1], got {fidelity}"
        )));
    }
    let dims = BipartiteDims::new(m, m)?;
    let phi = bell_pure(m)?;
    let proj = outer(phi.amplitudes(), phi.amplitudes());
    let d = dims.total();
    let noise = (CMatrix::identity(d, d) - &proj).scale(1.0 / (d as f64 - 1.0));
    Ok(DensityMatrix::trusted(proj.scale(fidelity) + noise.scale(1.0 - fidelity), dims, false))
}

/// Product state `rho_A ⊗ rho_B` from raw single-system density matrices.
pub fn product_state(rho_a: &CMatrix, rho_b: &CMatrix) -> Result<DensityMatrix> {
    if rho_a.nrows() != rho_a.ncols() || rho_b.nrows() != rho_b.ncols() {
        return Err(Error::DimensionMismatch("product factors must be square".into()));
    }
    DensityMatrix::new(rho_a.kronecker(rho_b), rho_a.nrows(), rho_b.nrows())
}

/// Convex combination `sum_i w_i rho_i`. Weights must be non-negative and sum
/// to one; all components must share the same dimensions.
pub fn mix(components: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    if components.is_empty() {
        return Err(Error::WeightSum("empty mixture".into()));
    }
    if let Some((w, _)) = components.iter().find(|(w, _)| *w < 0.0) {
        return Err(Error::WeightSum(format!("negative weight {w}")));
    }
    let sum: f64 = components.iter().map(|(w, _)| w).sum();
    if (sum - 1.0).abs() > tol::TRACE {
        return Err(Error::WeightSum(format!(
            "weights sum to {sum}, deviation {:.3e}",
            (sum - 1.0).abs()
        )));
    }
    let dims = components[0].1.dims();
    if components.iter().any(|(_, rho)| rho.dims() != dims) {
        return Err(Error::DimensionMismatch("mixture components differ in dimensions".into()));
    }
    let d = dims.total();
    let mut mat = CMatrix::zeros(d, d);
    for (w, rho) in components {
        mat += rho.mat().scale(*w);
    }
    DensityMatrix::new(mat, dims.m(), dims.n())
}

// ---------------------------------------------------------------------------
// Random states (seeded, for tests and the CLI `random_ginibre` family)
// ---------------------------------------------------------------------------

fn ginibre_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Full-rank random mixed state `G G^dagger / Tr(G G^dagger)` from a seeded
/// Ginibre matrix.
pub fn random_ginibre(m: usize, n: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_ginibre_with(m, n, &mut rng)
}

/// Ginibre-ensemble mixed state from a caller-supplied RNG.
pub fn random_ginibre_with<R: Rng>(m: usize, n: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = m * n;
    let g = ginibre_matrix(d, d, rng);
    let mat = &g * g.adjoint();
    let tr = mat.trace().re;
    DensityMatrix::new(mat.scale(1.0 / tr), m, n)
}

/// Haar-random bipartite pure state.
pub fn random_pure_with<R: Rng>(dims: BipartiteDims, rng: &mut R) -> PureState {
    let g = ginibre_matrix(dims.total(), 1, rng);
    let amps = g.column(0).into_owned().normalize();
    PureState::trusted(amps, dims)
}

/// Haar-random single-system pure density matrix of the given dimension.
fn random_single_pure<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let v = ginibre_matrix(dim, 1, rng).column(0).into_owned().normalize();
    outer(&v, &v)
}

/// Random separable state: a convex mixture of at most `max_terms` random
/// pure product states with Dirichlet-ish weights.
pub fn random_separable_with<R: Rng>(
    dims: BipartiteDims,
    max_terms: usize,
    rng: &mut R,
) -> DensityMatrix {
    let terms = rng.random_range(1..=max_terms.max(1));
    let mut weights: Vec<f64> = (0..terms).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let d = dims.total();
    let mut mat = CMatrix::zeros(d, d);
    for w in weights {
        let a = random_single_pure(dims.m(), rng);
        let b = random_single_pure(dims.n(), rng);
        mat += a.kronecker(&b).scale(w);
    }
    DensityMatrix::trusted(mat, dims, false)
}

// ---------------------------------------------------------------------------
// Family dispatch by name (CLI surface)
// ---------------------------------------------------------------------------

fn param_f64(params: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let raw = params
        .get(key)
        .ok_or_else(|| Error::BadParams(format!("missing parameter `{key}`")))?;
    raw.parse::<f64>()
        .map_err(|_| Error::BadParams(format!("parameter `{key}`: `{raw}` is not a number")))
}

fn param_usize(params: &BTreeMap<String, String>, key: &str) -> Result<usize> {
    let raw = params
        .get(key)
        .ok_or_else(|| Error::BadParams(format!("missing parameter `{key}`")))?;
    raw.parse::<usize>()
        .map_err(|_| Error::BadParams(format!("parameter `{key}`: `{raw}` is not an integer")))
}

fn param_u64_or(params: &BTreeMap<String, String>, key: &str, default: u64) -> Result<u64> {
    match params.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse::<u64>()
            .map_err(|_| Error::BadParams(format!("parameter `{key}`: `{raw}` is not an integer"))),
    }
}

fn reject_unknown(params: &BTreeMap<String, String>, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::BadParams(format!("unknown parameter `{key}`")));
        }
    }
    Ok(())
}

/// Instantiates a named example family. Parameter keys are lower-case.
///
/// Families: `bell` (`m`), `tiles_upb`, `figure1` (`p`),
/// `isotropic` (`m`, `f`), `product` (`m`, `n`, `seed` — random product
/// state), `random_ginibre` (`m`, `n`, `seed`).
pub fn make_family(name: &str, params: &BTreeMap<String, String>) -> Result<DensityMatrix> {
    match name {
        "bell" => {
            reject_unknown(params, &["m"])?;
            bell(param_usize(params, "m")?)
        }
        "tiles_upb" => {
            reject_unknown(params, &[])?;
            Ok(tiles_upb())
        }
        "figure1" => {
            reject_unknown(params, &["p"])?;
            figure1(param_f64(params, "p")?)
        }
        "isotropic" => {
            reject_unknown(params, &["m", "f"])?;
            isotropic(param_usize(params, "m")?, param_f64(params, "f")?)
        }
        "product" => {
            reject_unknown(params, &["m", "n", "seed"])?;
            let m = param_usize(params, "m")?;
            let n = param_usize(params, "n")?;
            let seed = param_u64_or(params, "seed", 0)?;
            let (dims, _) = BipartiteDims::canonical(m, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_single_pure(dims.m(), &mut rng);
            let b = random_single_pure(dims.n(), &mut rng);
            product_state(&a, &b)
        }
        "random_ginibre" => {
            reject_unknown(params, &["m", "n", "seed"])?;
            random_ginibre(
                param_usize(params, "m")?,
                param_usize(params, "n")?,
                param_u64_or(params, "seed", 0)?,
            )
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

/// Distinguished pure state of a family, when one exists. Used by the
/// `lemma1-psi` observable strategy, which adapts the observables to the
/// family's entangled reference state rather than to the mixed input.
pub fn family_reference_pure(
    name: &str,
    params: &BTreeMap<String, String>,
) -> Result<Option<PureState>> {
    match name {
        "bell" => Ok(Some(bell_pure(param_usize(params, "m")?)?)),
        "figure1" => Ok(Some(figure1_pure())),
        "isotropic" => Ok(Some(bell_pure(param_usize(params, "m")?)?)),
        "tiles_upb" | "product" | "random_ginibre" => Ok(None),
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

/// The sweepable parameter of a family, if any.
pub fn family_sweep_param(name: &str) -> Option<&'static str> {
    match name {
        "figure1" => Some("p"),
        "isotropic" => Some("f"),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs;
    use approx::assert_relative_eq;

    fn maximally_mixed(m: usize, n: usize) -> CMatrix {
        let d = m * n;
        CMatrix::identity(d, d).scale(1.0 / d as f64)
    }

    #[test]
    fn maximally_mixed_is_valid() {
        let rho = DensityMatrix::new(maximally_mixed(2, 2), 2, 2).unwrap();
        assert_eq!(rho.dims().total(), 4);
        assert!(!rho.swapped());
    }

    #[test]
    fn trace_violation_is_reported_with_magnitude() {
        let mat = maximally_mixed(2, 2).scale(0.9);
        let err = DensityMatrix::new(mat, 2, 2).unwrap_err();
        match err {
            Error::Validation(violations) => {
                assert!(violations
                    .iter()
                    .any(|v| matches!(v, Violation::TraceNotOne(d) if (d - 0.1).abs() < 1e-12)));
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_detected() {
        let err = DensityMatrix::new(maximally_mixed(2, 2), 2, 3).unwrap_err();
        assert!(matches!(err, Error::Validation(v)
            if matches!(v[0], Violation::DimensionMismatch { expected: 6, .. })));
    }

    #[test]
    fn trivial_subsystems_are_rejected() {
        assert!(BipartiteDims::new(1, 4).is_err());
        assert!(BipartiteDims::new(2, 1).is_err());
        assert!(DensityMatrix::new(maximally_mixed(1, 4), 1, 4).is_err());
    }

    #[test]
    fn oversized_first_subsystem_is_swapped() {
        // 3x2 input gets relabeled to 2x3.
        let mut mat = CMatrix::zeros(6, 6);
        mat[(0, 0)] = cr(1.0); // |0>_A |0>_B with A dim 3, B dim 2
        let rho = DensityMatrix::new(mat, 3, 2).unwrap();
        assert!(rho.swapped());
        assert_eq!(rho.dims().m(), 2);
        assert_eq!(rho.dims().n(), 3);
        // |00> stays |00> under relabeling.
        assert_relative_eq!(rho.mat()[(0, 0)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_of_product_state_recovers_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_single_pure(2, &mut rng);
        let b = random_single_pure(3, &mut rng);
        let rho = product_state(&a, &b).unwrap();
        assert!(max_abs(&(rho.partial_trace_b() - &a)) < 1e-12);
        assert!(max_abs(&(rho.partial_trace_a() - &b)) < 1e-12);
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let rho = bell(2).unwrap();
        let expect = CMatrix::identity(2, 2).scale(0.5);
        assert!(max_abs(&(rho.partial_trace_b() - expect)) < 1e-12);
    }

    #[test]
    fn figure1_reduction_matches_hand_contraction() {
        let rho = figure1(0.5).unwrap();
        let ra = rho.partial_trace_b();
        assert_relative_eq!(ra[(0, 0)].re, 0.75, epsilon = 1e-12);
        assert_relative_eq!(ra[(1, 1)].re, 0.25, epsilon = 1e-12);
        assert!(ra[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn schmidt_of_product_state() {
        let amps = kron_vec(&ket(2, 0), &ket(2, 0));
        let psi = PureState::new(amps, 2, 2).unwrap();
        let sd = psi.schmidt();
        assert_relative_eq!(sd.coefficients[0], 1.0, epsilon = 1e-12);
        assert!(sd.coefficients[1].abs() < 1e-12);
    }

    #[test]
    fn schmidt_of_embedded_bell_in_2x3() {
        let psi = figure1_pure();
        let sd = psi.schmidt();
        assert_eq!(sd.coefficients.len(), 2);
        assert_relative_eq!(sd.coefficients[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(sd.coefficients[1], 0.5, epsilon = 1e-12);
        assert_eq!(sd.basis_b[0].len(), 3);
    }

    #[test]
    fn schmidt_reconstruction_roundtrip() {
        let dims = BipartiteDims::new(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let psi = random_pure_with(dims, &mut rng);
            let rebuilt = psi.schmidt().reconstruct();
            let defect = (rebuilt - psi.amplitudes()).norm();
            assert!(defect < tol::RECON, "reconstruction defect {defect}");
        }
    }

    #[test]
    fn concurrence_endpoints() {
        let product = PureState::new(kron_vec(&ket(2, 1), &ket(3, 2)), 2, 3).unwrap();
        assert!(product.concurrence() < 1e-12);
        assert_relative_eq!(bell_pure(2).unwrap().concurrence(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            bell_pure(3).unwrap().concurrence(),
            (4.0_f64 / 3.0).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn concurrence_two_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(m, n) in &[(2usize, 2usize), (2, 3), (3, 3)] {
            let dims = BipartiteDims::new(m, n).unwrap();
            for _ in 0..334 {
                let psi = random_pure_with(dims, &mut rng);
                let via_purity = psi.concurrence();
                let mu = psi.schmidt().coefficients;
                let mut cross = 0.0;
                for j in 0..mu.len() {
                    for k in (j + 1)..mu.len() {
                        cross += mu[j] * mu[k];
                    }
                }
                assert_relative_eq!(via_purity, 2.0 * cross.max(0.0).sqrt(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn tiles_is_valid_rank_four() {
        let rho = tiles_upb();
        assert_relative_eq!(rho.mat().trace().re, 1.0, epsilon = 1e-12);
        assert_eq!(rho.rank(), 4);
        // Revalidate through the public constructor.
        assert!(DensityMatrix::new(rho.mat().clone(), 3, 3).is_ok());
    }

    #[test]
    fn figure1_limits() {
        let pure = figure1(1.0).unwrap();
        assert_relative_eq!(pure.purity(), 1.0, epsilon = 1e-12);
        assert!(figure1(1.5).is_err());
    }

    #[test]
    fn isotropic_limit_is_bell() {
        let iso = isotropic(2, 1.0).unwrap();
        let phi = bell(2).unwrap();
        assert!(max_abs(&(iso.mat() - phi.mat())) < 1e-12);
        assert!(isotropic(2, -0.1).is_err());
    }

    #[test]
    fn mix_identities_and_validity() {
        let rho = random_ginibre(2, 2, 5).unwrap();
        let same = mix(&[(1.0, rho.clone())]).unwrap();
        assert!(max_abs(&(same.mat() - rho.mat())) < 1e-12);
        let halves = mix(&[(0.5, rho.clone()), (0.5, rho.clone())]).unwrap();
        assert!(max_abs(&(halves.mat() - rho.mat())) < 1e-12);

        let other = random_ginibre(2, 2, 6).unwrap();
        assert!(mix(&[(0.3, rho.clone()), (0.7, other)]).is_ok());
        assert!(matches!(mix(&[(0.3, rho.clone())]), Err(Error::WeightSum(_))));
        let odd = random_ginibre(2, 3, 6).unwrap();
        assert!(matches!(
            mix(&[(0.5, rho), (0.5, odd)]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn partial_traces_stay_valid_density_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for &(m, n) in &[(2usize, 2usize), (2, 3), (3, 3)] {
            for _ in 0..20 {
                let rho = random_ginibre_with(m, n, &mut rng).unwrap();
                for red in [rho.partial_trace_b(), rho.partial_trace_a()] {
                    assert!(hermiticity_defect(&red) < tol::HERM);
                    assert_relative_eq!(red.trace().re, 1.0, epsilon = 1e-9);
                    let min = hermitian_eigenvalues(&red).last().copied().unwrap();
                    assert!(min > -tol::PSD);
                }
            }
        }
    }

    #[test]
    fn family_dispatch() {
        let mut params = BTreeMap::new();
        params.insert("m".to_string(), "2".to_string());
        assert!(make_family("bell", &params).is_ok());
        assert!(matches!(
            make_family("nope", &BTreeMap::new()),
            Err(Error::UnknownFamily(_))
        ));
        let mut bad = BTreeMap::new();
        bad.insert("m".to_string(), "2".to_string());
        bad.insert("f".to_string(), "1.5".to_string());
        assert!(matches!(make_family("isotropic", &bad), Err(Error::BadParams(_))));
    }
}
