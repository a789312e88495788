//! Local orthogonal observables (LOOs): orthonormal Hermitian operator bases
//! for one subsystem, paired families for the two-sided uncertainty
//! criterion, and the SU(d) generator construction behind the Bloch
//! representation.
//!
//! A LOO set for dimension `d` holds `d^2` Hermitian matrices `G_i` with
//! `Tr(G_i G_j) = delta_ij`; every such set also satisfies the completeness
//! identity `sum_i G_i^2 = d I`. Pairs carry one set per subsystem with
//! positional pairing; when `m < n` the A side is implicitly zero-padded so
//! that positions `m^2..n^2` pair a zero observable with the B-side element.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{cr, ket, max_abs, outer, CMatrix, CVector};
use crate::qstate::{BipartiteDims, DensityMatrix, SchmidtDecomposition};
use crate::rearrange::realign_mat;
use crate::tol;

/// An orthonormal basis of the Hermitian operators on one subsystem.
#[derive(Debug, Clone)]
pub struct LooSet {
    dim: usize,
    mats: Vec<CMatrix>,
}

/// Element labels of the standard LOO construction, in canonical order:
/// all diagonal projectors ascending, then the symmetric off-diagonal pairs
/// in lexicographic order, then the antisymmetric ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Diag(usize),
    Plus(usize, usize),
    Minus(usize, usize),
}

fn standard_labels(d: usize) -> Vec<Label> {
    let mut labels = Vec::with_capacity(d * d);
    for j in 0..d {
        labels.push(Label::Diag(j));
    }
    for j in 0..d {
        for k in (j + 1)..d {
            labels.push(Label::Plus(j, k));
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            labels.push(Label::Minus(j, k));
        }
    }
    labels
}

/// `g_j`, `g_jk^+` or `g_jk^-` built over an arbitrary orthonormal basis.
fn label_matrix(label: Label, basis: &[CVector]) -> CMatrix {
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    match label {
        Label::Diag(j) => outer(&basis[j], &basis[j]),
        Label::Plus(j, k) => {
            (outer(&basis[j], &basis[k]) + outer(&basis[k], &basis[j])).scale(inv_sqrt2)
        }
        Label::Minus(j, k) => {
            let jk = outer(&basis[j], &basis[k]) - outer(&basis[k], &basis[j]);
            jk * crate::matrix::c(0.0, -inv_sqrt2)
        }
    }
}

fn orthonormality_defect(mats: &[CMatrix]) -> f64 {
    let mut defect = 0.0_f64;
    for i in 0..mats.len() {
        for j in i..mats.len() {
            let inner = (mats[i].adjoint() * &mats[j]).trace();
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((inner - cr(target)).norm());
        }
    }
    defect
}

fn completeness_defect(mats: &[CMatrix], dim: usize) -> f64 {
    let mut sum = CMatrix::zeros(dim, dim);
    for g in mats {
        sum += g * g;
    }
    max_abs(&(sum - CMatrix::identity(dim, dim).scale(dim as f64)))
}

impl LooSet {
    /// Validates `d^2` Hermitian matrices as an orthonormal operator basis.
    pub fn new(dim: usize, mats: Vec<CMatrix>) -> Result<Self> {
        if mats.len() != dim * dim {
            return Err(Error::BadLooSet(format!(
                "expected {} observables for dimension {dim}, got {}",
                dim * dim,
                mats.len()
            )));
        }
        if let Some(bad) = mats.iter().find(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::BadLooSet(format!(
                "observable has shape {}x{}, expected {dim}x{dim}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        let herm = mats.iter().map(crate::matrix::hermiticity_defect).fold(0.0, f64::max);
        if herm > tol::HERM {
            return Err(Error::BadLooSet(format!("observable not Hermitian (defect {herm:.3e})")));
        }
        let orth = orthonormality_defect(&mats);
        if orth > tol::ORTH {
            return Err(Error::BadLooSet(format!("not orthonormal (defect {orth:.3e})")));
        }
        let completeness = completeness_defect(&mats, dim);
        if completeness > tol::COMPLETENESS {
            return Err(Error::BadLooSet(format!(
                "completeness identity violated (defect {completeness:.3e})"
            )));
        }
        Ok(Self { dim, mats })
    }

    /// Internal constructor for sets orthonormal by construction.
    fn trusted(dim: usize, mats: Vec<CMatrix>) -> Self {
        debug_assert!(orthonormality_defect(&mats) < 1e-8);
        Self { dim, mats }
    }

    /// The standard set `{g_j} ∪ {g_jk^+} ∪ {g_jk^-}` over the computational
    /// basis, in canonical order.
    pub fn standard(dim: usize) -> Self {
        let basis: Vec<CVector> = (0..dim).map(|j| ket(dim, j)).collect();
        Self::standard_in_basis(&basis).expect("computational basis is orthonormal")
    }

    /// The standard set built over a caller-supplied orthonormal basis.
    pub fn standard_in_basis(basis: &[CVector]) -> Result<Self> {
        let dim = basis.len();
        let defect = basis_orthonormality_defect(basis);
        if defect > tol::ORTH {
            return Err(Error::BadBasis(defect));
        }
        let mats = standard_labels(dim).into_iter().map(|l| label_matrix(l, basis)).collect();
        Ok(Self::trusted(dim, mats))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// Basis change `G'_i = sum_j o_ij G_j` by a real orthogonal matrix;
    /// preserves both set invariants.
    pub fn rotate(&self, o: &DMatrix<f64>) -> Result<Self> {
        let k = self.mats.len();
        if o.nrows() != k || o.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "rotation is {}x{}, expected {k}x{k}",
                o.nrows(),
                o.ncols()
            )));
        }
        let defect = orthogonality_defect(o);
        if defect > tol::ORTH {
            return Err(Error::NotOrthogonal(defect));
        }
        let mats: Vec<CMatrix> = (0..k)
            .map(|i| {
                let mut acc = CMatrix::zeros(self.dim, self.dim);
                for j in 0..k {
                    acc += self.mats[j].scale(o[(i, j)]);
                }
                acc
            })
            .collect();
        Ok(Self::trusted(self.dim, mats))
    }
}

/// Rotates a LOO set by a real orthogonal matrix; see [`LooSet::rotate`].
pub fn rotate(set: &LooSet, o: &DMatrix<f64>) -> Result<LooSet> {
    set.rotate(o)
}

/// The standard LOO set; see [`LooSet::standard`] and
/// [`LooSet::standard_in_basis`].
pub fn standard_loos(dim: usize, basis: Option<&[CVector]>) -> Result<LooSet> {
    match basis {
        Some(b) => {
            if b.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "basis has {} vectors, expected {dim}",
                    b.len()
                )));
            }
            LooSet::standard_in_basis(b)
        }
        None => Ok(LooSet::standard(dim)),
    }
}

fn basis_orthonormality_defect(basis: &[CVector]) -> f64 {
    let mut defect = 0.0_f64;
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let inner = basis[i].dotc(&basis[j]);
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((inner - cr(target)).norm());
        }
    }
    defect
}

fn orthogonality_defect(o: &DMatrix<f64>) -> f64 {
    let gram = o * o.transpose();
    let mut defect = 0.0_f64;
    for i in 0..o.nrows() {
        for j in 0..o.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, j)] - target).abs());
        }
    }
    defect
}

// ---------------------------------------------------------------------------
// SU(d) generators
// ---------------------------------------------------------------------------

/// The `d^2 - 1` traceless Hermitian generators of SU(d) normalized to
/// `Tr(lambda_i lambda_j) = 2 delta_ij`, in canonical order: the diagonal
/// `w_l` ascending, then `u_jk = sqrt(2) g_jk^+` and `v_jk = sqrt(2) g_jk^-`
/// lexicographically.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    dim: usize,
    mats: Vec<CMatrix>,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// Rescaled by `1/sqrt(2)` and augmented with `I/sqrt(d)`, the generators
    /// form a valid LOO set (identity first).
    pub fn to_loo_set(&self) -> LooSet {
        let d = self.dim;
        let mut mats = Vec::with_capacity(d * d);
        mats.push(CMatrix::identity(d, d).scale(1.0 / (d as f64).sqrt()));
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        mats.extend(self.mats.iter().map(|g| g.scale(inv_sqrt2)));
        LooSet::trusted(d, mats)
    }
}

/// SU(d) generator set over the computational basis.
pub fn gellmann(d: usize) -> GeneratorSet {
    let basis: Vec<CVector> = (0..d).map(|j| ket(d, j)).collect();
    let mut mats = Vec::with_capacity(d * d - 1);
    // w_l = sqrt(2 / ((l+1)(l+2))) (sum_{i<=l} |i><i| - (l+1) |l+1><l+1|)
    for l in 0..(d - 1) {
        let scale = (2.0 / ((l as f64 + 1.0) * (l as f64 + 2.0))).sqrt();
        let mut w = CMatrix::zeros(d, d);
        for b in &basis[..=l] {
            w += outer(b, b);
        }
        w -= outer(&basis[l + 1], &basis[l + 1]).scale(l as f64 + 1.0);
        mats.push(w.scale(scale));
    }
    let sqrt2 = 2.0_f64.sqrt();
    for j in 0..d {
        for k in (j + 1)..d {
            mats.push(label_matrix(Label::Plus(j, k), &basis).scale(sqrt2));
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            mats.push(label_matrix(Label::Minus(j, k), &basis).scale(sqrt2));
        }
    }
    GeneratorSet { dim: d, mats }
}

// ---------------------------------------------------------------------------
// Paired families
// ---------------------------------------------------------------------------

/// A positionally paired family `(G_i^A, G_i^B)` for the two-sided
/// uncertainty criterion. The A side holds `m^2` observables occupying pair
/// positions `0..m^2`; positions `m^2..n^2` pair the zero observable with the
/// remaining B-side elements.
#[derive(Debug, Clone)]
pub struct LooPair {
    dims: BipartiteDims,
    set_a: LooSet,
    set_b: LooSet,
}

impl LooPair {
    pub fn new(dims: BipartiteDims, set_a: LooSet, set_b: LooSet) -> Result<Self> {
        if set_a.dim() != dims.m() || set_b.dim() != dims.n() {
            return Err(Error::DimensionMismatch(format!(
                "pair sets have dimensions ({}, {}), state has ({}, {})",
                set_a.dim(),
                set_b.dim(),
                dims.m(),
                dims.n()
            )));
        }
        Ok(Self { dims, set_a, set_b })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn set_a(&self) -> &LooSet {
        &self.set_a
    }

    pub fn set_b(&self) -> &LooSet {
        &self.set_b
    }

    /// A-side observable at pair position `i`, or `None` for the zero-padded
    /// tail.
    pub fn a_at(&self, i: usize) -> Option<&CMatrix> {
        self.set_a.mats().get(i)
    }

    /// The full zero-padded A side (`n^2` matrices of size `m x m`).
    pub fn a_padded(&self) -> Vec<CMatrix> {
        let m = self.dims.m();
        let mut out = self.set_a.mats().to_vec();
        out.resize(self.dims.n() * self.dims.n(), CMatrix::zeros(m, m));
        out
    }

    /// Number of pair positions, `n^2`.
    pub fn positions(&self) -> usize {
        self.dims.n() * self.dims.n()
    }

    /// Rotates the A-side observables by `o` in `O(m^2)`.
    pub fn rotate_a(&self, o: &DMatrix<f64>) -> Result<Self> {
        Ok(Self { dims: self.dims, set_a: self.set_a.rotate(o)?, set_b: self.set_b.clone() })
    }

    /// Rotates the B-side observables by `o` in `O(n^2)`.
    pub fn rotate_b(&self, o: &DMatrix<f64>) -> Result<Self> {
        Ok(Self { dims: self.dims, set_a: self.set_a.clone(), set_b: self.set_b.rotate(o)? })
    }
}

/// B-side sign pattern shared by the adapted pairs: diagonal and symmetric
/// elements are negated, antisymmetric ones keep their sign.
fn sign_of(label: Label) -> f64 {
    match label {
        Label::Diag(_) | Label::Plus(_, _) => -1.0,
        Label::Minus(_, _) => 1.0,
    }
}

/// Builds the adapted pair over explicit local bases: the A side is the
/// standard set over `basis_a`; the B side pairs each A element with its
/// sign-flipped counterpart over `basis_b` and appends the remaining B
/// elements (those touching basis vectors beyond `m`) after position `m^2`.
fn pair_from_bases(
    dims: BipartiteDims,
    basis_a: &[CVector],
    basis_b: &[CVector],
) -> Result<LooPair> {
    let (m, n) = (dims.m(), dims.n());
    if basis_a.len() != m || basis_b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected {m} A-basis and {n} B-basis vectors, got {} and {}",
            basis_a.len(),
            basis_b.len()
        )));
    }
    let set_a = LooSet::standard_in_basis(basis_a)?;

    let defect = basis_orthonormality_defect(basis_b);
    if defect > tol::ORTH {
        return Err(Error::BadBasis(defect));
    }
    // Partner block first (labels confined to the first m basis vectors, in
    // the A side's canonical order), then the leftover labels.
    let within = |label: &Label| match *label {
        Label::Diag(j) => j < m,
        Label::Plus(j, k) | Label::Minus(j, k) => j < m && k < m,
    };
    let all = standard_labels(n);
    let mut ordered: Vec<Label> = all.iter().copied().filter(within).collect();
    ordered.extend(all.iter().copied().filter(|l| !within(l)));
    let mats_b: Vec<CMatrix> = ordered
        .into_iter()
        .map(|l| label_matrix(l, basis_b).scale(sign_of(l)))
        .collect();
    let set_b = LooSet::trusted(n, mats_b);
    LooPair::new(dims, set_a, set_b)
}

/// The pair adapted to a pure state's Schmidt bases. On that state the
/// two-sided uncertainty sum attains its minimum over all LOO pairs,
/// `m + n - 2 - 4 sum_{j<k} sqrt(mu_j mu_k)`.
pub fn schmidt_pair(sd: &SchmidtDecomposition, dims: BipartiteDims) -> Result<LooPair> {
    let basis_b = complete_orthonormal(&sd.basis_b, dims.n())?;
    pair_from_bases(dims, &sd.basis_a, &basis_b)
}

/// The adapted pair over the computational bases.
pub fn standard_pair(dims: BipartiteDims) -> LooPair {
    let basis_a: Vec<CVector> = (0..dims.m()).map(|j| ket(dims.m(), j)).collect();
    let basis_b: Vec<CVector> = (0..dims.n()).map(|j| ket(dims.n(), j)).collect();
    pair_from_bases(dims, &basis_a, &basis_b).expect("computational bases are orthonormal")
}

/// The pair tailored to isotropic states (`m = n` only): identity plus
/// rescaled SU(m) generators, with the B side negated except on the
/// antisymmetric generators. On isotropic states its uncertainty bound
/// coincides with the rearrangement bound.
pub fn isotropic_pair(m: usize, n: usize) -> Result<LooPair> {
    if m != n {
        return Err(Error::DimensionMismatch(format!(
            "isotropic pair requires m = n, got ({m}, {n})"
        )));
    }
    let dims = BipartiteDims::new(m, n)?;
    let set_a = gellmann(m).to_loo_set();
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    let d = m;
    let mut mats_b = Vec::with_capacity(d * d);
    mats_b.push(CMatrix::identity(d, d).scale(-1.0 / (d as f64).sqrt()));
    let gens = gellmann(d);
    let n_w = d - 1;
    let n_u = d * (d - 1) / 2;
    for (idx, g) in gens.mats().iter().enumerate() {
        // w's and u's are negated, v's are not.
        let sign = if idx < n_w + n_u { -1.0 } else { 1.0 };
        mats_b.push(g.scale(sign * inv_sqrt2));
    }
    let set_b = LooSet::trusted(d, mats_b);
    LooPair::new(dims, set_a, set_b)
}

/// Pair adapted to the operator Schmidt decomposition of `rho` itself:
/// `rho = sum_i sigma_i A_i ⊗ B_i` with orthonormal Hermitian factors, so the
/// paired cross sum reaches `-||R(rho)||`. This is the natural starting point
/// for observable optimization, as the resulting uncertainty bound is never
/// weaker than the realignment bound.
pub fn realignment_pair(rho: &DensityMatrix) -> Result<LooPair> {
    let dims = rho.dims();
    let (m, n) = (dims.m(), dims.n());
    let base_a = LooSet::standard(m);
    let base_b = LooSet::standard(n);

    // Express the realigned state in the Hermitian operator bases; the
    // resulting coefficient matrix is real, so a real SVD yields Hermitian
    // Schmidt factors directly.
    let r = realign_mat(rho.mat(), dims);
    let conv_a = CMatrix::from_fn(m * m, m * m, |p, row| {
        let (i, j) = (row / m, row % m);
        base_a.mats()[p][(j, i)]
    });
    let conv_b = CMatrix::from_fn(n * n, n * n, |q, col| {
        let (k, l) = (col / n, col % n);
        base_b.mats()[q][(l, k)]
    });
    let w_complex = conv_a * r * conv_b.transpose();
    let imag = w_complex.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-10 {
        return Err(Error::Numerics(format!(
            "operator Schmidt coefficients have imaginary residue {imag:.3e}"
        )));
    }
    let w = DMatrix::<f64>::from_fn(m * m, n * n, |p, q| w_complex[(p, q)].re);

    let svd = w.svd(true, true);
    let u = svd.u.expect("SVD with vectors requested");
    let v_t = svd.v_t.expect("SVD with vectors requested");

    // A_i = -sum_p U[p, i] E_p^A  (sign makes the paired cross sum negative).
    let mats_a: Vec<CMatrix> = (0..m * m)
        .map(|i| {
            let mut acc = CMatrix::zeros(m, m);
            for p in 0..m * m {
                acc += base_a.mats()[p].scale(-u[(p, i)]);
            }
            acc
        })
        .collect();

    // Complete the right-singular rows to an orthonormal basis of R^{n^2}.
    let rows: Vec<Vec<f64>> = (0..v_t.nrows())
        .map(|i| (0..n * n).map(|q| v_t[(i, q)]).collect())
        .collect();
    let coeffs = complete_orthonormal_real(&rows, n * n);
    let mats_b: Vec<CMatrix> = coeffs
        .iter()
        .map(|row| {
            let mut acc = CMatrix::zeros(n, n);
            for (q, &x) in row.iter().enumerate() {
                acc += base_b.mats()[q].scale(x);
            }
            acc
        })
        .collect();

    LooPair::new(dims, LooSet::new(m, mats_a)?, LooSet::new(n, mats_b)?)
}

// ---------------------------------------------------------------------------
// Orthogonal matrices and basis completion
// ---------------------------------------------------------------------------

/// Haar-ish random orthogonal matrix: QR of a seeded Gaussian matrix with the
/// sign ambiguity fixed by forcing a positive R diagonal. Deterministic per
/// seed.
pub fn random_orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_orthogonal_with(dim, &mut rng)
}

/// Random orthogonal matrix from a caller-supplied RNG.
pub fn random_orthogonal_with<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut o = q;
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            for i in 0..dim {
                o[(i, j)] = -o[(i, j)];
            }
        }
    }
    o
}

/// Extends orthonormal complex vectors to a full orthonormal basis by
/// Gram-Schmidt against the standard kets; deterministic.
pub fn complete_orthonormal(vectors: &[CVector], dim: usize) -> Result<Vec<CVector>> {
    let defect = basis_orthonormality_defect(vectors);
    if defect > 1e-8 {
        return Err(Error::BadBasis(defect));
    }
    let mut basis: Vec<CVector> = vectors.to_vec();
    let mut j = 0;
    while basis.len() < dim {
        if j >= dim {
            return Err(Error::Numerics("basis completion failed".into()));
        }
        let mut v = ket(dim, j);
        // Two Gram-Schmidt passes keep the completion orthonormal to
        // round-off even when the residual starts small.
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        if v.norm() > 1e-6 {
            basis.push(v.normalize());
        }
        j += 1;
    }
    Ok(basis)
}

/// Real counterpart of [`complete_orthonormal`] for coefficient rows.
fn complete_orthonormal_real(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = rows.to_vec();
    let mut j = 0;
    while basis.len() < dim && j < dim {
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let overlap: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
        j += 1;
    }
    assert_eq!(basis.len(), dim, "basis completion failed");
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;
    use crate::qstate::{bell_pure, random_ginibre_with, random_pure_with};
    use approx::assert_relative_eq;

    #[test]
    fn standard_set_for_qubits() {
        let set = LooSet::standard(2);
        assert_eq!(set.len(), 4);
        let g0 = &set.mats()[0];
        assert_eq!(g0[(0, 0)], cr(1.0));
        assert_eq!(g0[(1, 1)], cr(0.0));
        let g1 = &set.mats()[1];
        assert_eq!(g1[(1, 1)], cr(1.0));
        // sigma_x / sqrt(2) and sigma_y / sqrt(2)
        let s = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(set.mats()[2][(0, 1)].re, s, epsilon = 1e-15);
        assert_relative_eq!(set.mats()[3][(0, 1)].im, -s, epsilon = 1e-15);
        assert_relative_eq!(set.mats()[3][(1, 0)].im, s, epsilon = 1e-15);
    }

    #[test]
    fn standard_set_invariants_hold() {
        for d in 2..=5 {
            let set = LooSet::standard(d);
            assert!(orthonormality_defect(set.mats()) < tol::ORTH);
            assert!(completeness_defect(set.mats(), d) < tol::COMPLETENESS);
        }
    }

    #[test]
    fn rotation_preserves_invariants_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let set = LooSet::standard(3);
        let o = random_orthogonal_with(9, &mut rng);
        let rotated = set.rotate(&o).unwrap();
        assert!(orthonormality_defect(rotated.mats()) < 1e-9);
        assert!(completeness_defect(rotated.mats(), 3) < 1e-9);
        let back = rotated.rotate(&o.transpose()).unwrap();
        for (orig, rt) in set.mats().iter().zip(back.mats()) {
            assert!(max_abs(&(orig - rt)) < 1e-12);
        }
    }

    #[test]
    fn rotation_rejects_non_orthogonal() {
        let set = LooSet::standard(2);
        let o = DMatrix::<f64>::identity(4, 4).scale(1.1);
        assert!(matches!(set.rotate(&o), Err(Error::NotOrthogonal(_))));
    }

    #[test]
    fn identity_rotation_is_a_noop() {
        let set = LooSet::standard(3);
        let rotated = set.rotate(&DMatrix::<f64>::identity(9, 9)).unwrap();
        for (orig, rt) in set.mats().iter().zip(rotated.mats()) {
            assert!(max_abs(&(orig - rt)) < 1e-15);
        }
    }

    #[test]
    fn permutation_rotation_reorders() {
        let set = LooSet::standard(2);
        let mut perm = DMatrix::<f64>::zeros(4, 4);
        perm[(0, 1)] = 1.0;
        perm[(1, 0)] = 1.0;
        perm[(2, 3)] = 1.0;
        perm[(3, 2)] = 1.0;
        let rotated = set.rotate(&perm).unwrap();
        assert!(max_abs(&(&rotated.mats()[0] - &set.mats()[1])) < 1e-15);
        assert!(max_abs(&(&rotated.mats()[3] - &set.mats()[2])) < 1e-15);
    }

    #[test]
    fn gellmann_qubit_case_is_pauli() {
        let gens = gellmann(2);
        assert_eq!(gens.len(), 3);
        // w_0 = sigma_z, u_01 = sigma_x, v_01 = sigma_y
        assert_eq!(gens.mats()[0][(0, 0)], cr(1.0));
        assert_eq!(gens.mats()[0][(1, 1)], cr(-1.0));
        assert_eq!(gens.mats()[1][(0, 1)], cr(1.0));
        assert_eq!(gens.mats()[2][(0, 1)], c(0.0, -1.0));
    }

    #[test]
    fn gellmann_normalization_and_tracelessness() {
        for d in 2..=5 {
            let gens = gellmann(d);
            assert_eq!(gens.len(), d * d - 1);
            for (i, gi) in gens.mats().iter().enumerate() {
                assert!(gi.trace().norm() < 1e-12, "generator {i} not traceless");
                for (j, gj) in gens.mats().iter().enumerate() {
                    let inner = (gi.adjoint() * gj).trace();
                    let target = if i == j { 2.0 } else { 0.0 };
                    assert!((inner - cr(target)).norm() < tol::ORTH);
                }
            }
        }
    }

    #[test]
    fn gellmann_extends_to_loo_set() {
        for d in 2..=4 {
            let set = gellmann(d).to_loo_set();
            assert!(LooSet::new(d, set.mats().to_vec()).is_ok());
        }
    }

    #[test]
    fn row_sum_property_over_random_sets_and_vectors() {
        // For any LOO set and unit vectors a, b: sum_i |<a|G_i|b>|^2 = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for d in 2..=4 {
            let set = LooSet::standard(d)
                .rotate(&random_orthogonal_with(d * d, &mut rng))
                .unwrap();
            for _ in 0..20 {
                let a = CMatrix::from_fn(d, 1, |_, _| {
                    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
                .column(0)
                .into_owned()
                .normalize();
                let b = CMatrix::from_fn(d, 1, |_, _| {
                    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
                .column(0)
                .into_owned()
                .normalize();
                let total: f64 = set
                    .mats()
                    .iter()
                    .map(|g| a.dotc(&(g * &b)).norm_sqr())
                    .sum();
                assert_relative_eq!(total, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn random_orthogonal_contract() {
        let o = random_orthogonal(1, 3);
        assert!((o[(0, 0)].abs() - 1.0).abs() < 1e-12);
        for dim in [2, 5, 9] {
            let o = random_orthogonal(dim, 42);
            assert!(orthogonality_defect(&o) < tol::ORTH);
            let again = random_orthogonal(dim, 42);
            assert_eq!(o, again);
            let different = random_orthogonal(dim, 43);
            assert!(o != different);
        }
    }

    #[test]
    fn schmidt_pair_layout_and_padding() {
        let psi = crate::qstate::figure1_pure();
        let dims = psi.dims();
        let pair = schmidt_pair(&psi.schmidt(), dims).unwrap();
        assert_eq!(pair.set_a().len(), 4);
        assert_eq!(pair.set_b().len(), 9);
        assert_eq!(pair.positions(), 9);
        let padded = pair.a_padded();
        assert_eq!(padded.len(), 9);
        for tail in &padded[4..] {
            assert!(max_abs(tail) < 1e-15);
        }
    }

    #[test]
    fn isotropic_pair_requires_square_dims() {
        assert!(matches!(isotropic_pair(2, 3), Err(Error::DimensionMismatch(_))));
        let pair = isotropic_pair(2, 2).unwrap();
        assert_eq!(pair.set_a().len(), 4);
        assert!(LooSet::new(2, pair.set_a().mats().to_vec()).is_ok());
        assert!(LooSet::new(2, pair.set_b().mats().to_vec()).is_ok());
    }

    #[test]
    fn realignment_pair_reaches_minus_realignment_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for &(m, n) in &[(2usize, 2usize), (2, 3), (3, 3)] {
            let rho = random_ginibre_with(m, n, &mut rng).unwrap();
            let pair = realignment_pair(&rho).unwrap();
            let padded = pair.a_padded();
            let cross: f64 = padded
                .iter()
                .zip(pair.set_b().mats())
                .map(|(a, b)| rho.expectation(&a.kronecker(b)))
                .sum();
            let ccnr = crate::rearrange::ccnr_value(&rho);
            assert_relative_eq!(cross, -ccnr, epsilon = 1e-9);
        }
    }

    #[test]
    fn completion_produces_full_basis() {
        let psi = random_pure_with(BipartiteDims::new(2, 3).unwrap(), &mut ChaCha8Rng::seed_from_u64(9));
        let sd = psi.schmidt();
        let full = complete_orthonormal(&sd.basis_b, 3).unwrap();
        assert_eq!(full.len(), 3);
        assert!(basis_orthonormality_defect(&full) < 1e-9);
    }

    #[test]
    fn bell_schmidt_pair_matches_expected_cross_sum() {
        let psi = bell_pure(2).unwrap();
        let pair = schmidt_pair(&psi.schmidt(), psi.dims()).unwrap();
        let rho = psi.to_density();
        let cross: f64 = pair
            .a_padded()
            .iter()
            .zip(pair.set_b().mats())
            .map(|(a, b)| rho.expectation(&a.kronecker(b)))
            .sum();
        // -1 - 2 sum_{j<k} sqrt(mu_j mu_k) = -2 for the Bell state.
        assert_relative_eq!(cross, -2.0, epsilon = 1e-10);
    }
}
