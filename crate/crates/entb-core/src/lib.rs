//! Lower bounds on the concurrence of bipartite quantum states.
//!
//! Entanglement of an `M x N` mixed state is quantified here through the
//! concurrence, whose exact evaluation requires a convex-roof minimization
//! that is intractable in general. This crate instead computes analytical
//! lower bounds from the violation of four separability criteria:
//!
//! * the positive partial transpose (PPT) criterion,
//! * the computable cross norm / realignment (CCNR) criterion,
//! * local uncertainty relations (LURs) evaluated on local orthogonal
//!   observables (LOOs), and
//! * the Bloch correlation-matrix (CM) criterion.
//!
//! The LUR bound depends on the chosen observable sets; [`bounds::optimize_loos`]
//! searches the orthogonal group for sets that maximize it. A randomized
//! convex-roof upper estimator ([`bounds::upper_estimate`]) brackets the
//! bounds from above for cross-checking.

pub mod bounds;
pub mod criteria;
pub mod error;
pub mod io;
pub mod loo;
pub mod matrix;
pub mod qstate;
pub mod rearrange;
pub mod sweep;

pub use bounds::{BoundReport, OptimizerConfig, PairStrategy};
pub use criteria::{BlochDecomposition, CriterionKind, CriterionResult};
pub use error::{Error, Result, Violation};
pub use loo::{GeneratorSet, LooPair, LooSet};
pub use matrix::{CMatrix, CVector};
pub use qstate::{BipartiteDims, DensityMatrix, PureState, SchmidtDecomposition};
pub use sweep::SweepRow;

/// Numerical tolerances shared across the crate.
pub mod tol {
    /// Hermiticity defect allowed in a density matrix.
    pub const HERM: f64 = 1e-9;
    /// Allowed deviation of the trace from one.
    pub const TRACE: f64 = 1e-9;
    /// Allowed deviation of a pure-state norm from one.
    pub const NORM: f64 = 1e-9;
    /// Eigenvalue floor for positive semidefiniteness; looser than the others
    /// because convex mixing and file round-trips accumulate error.
    pub const PSD: f64 = 1e-8;
    /// Schmidt reconstruction accuracy.
    pub const RECON: f64 = 1e-9;
    /// Orthonormality defect allowed in an observable set.
    pub const ORTH: f64 = 1e-10;
    /// Defect allowed in the completeness identity `sum_i G_i^2 = d I`.
    pub const COMPLETENESS: f64 = 1e-9;
    /// Margin absorbed before a criterion counts as violated; separability
    /// thresholds are exact, so only numerical noise needs absorbing.
    pub const DETECT: f64 = 1e-9;
}
