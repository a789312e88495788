//! Error types for state validation and bound evaluation.

use std::fmt;

use thiserror::Error;

/// One violated density-matrix invariant together with its magnitude.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Largest entry-wise deviation from `rho = rho^dagger`.
    NotHermitian(f64),
    /// `|Tr(rho) - 1|`.
    TraceNotOne(f64),
    /// Magnitude of the most negative eigenvalue.
    NotPsd(f64),
    /// Matrix is not `(m*n) x (m*n)`.
    DimensionMismatch { expected: usize, rows: usize, cols: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian(v) => write!(f, "NotHermitian {v:.1e}"),
            Violation::TraceNotOne(v) => write!(f, "TraceNotOne {v:.1e}"),
            Violation::NotPsd(v) => write!(f, "NotPSD {v:.1e}"),
            Violation::DimensionMismatch { expected, rows, cols } => {
                write!(f, "DimensionMismatch expected {expected}x{expected}, got {rows}x{cols}")
            }
        }
    }
}

fn join_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// The matrix is not a valid density matrix; lists every violated
    /// invariant with its magnitude.
    #[error("invalid density matrix: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Mixture weights were negative or did not sum to one.
    #[error("bad mixture weights: {0}")]
    WeightSum(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("bad family parameters: {0}")]
    BadParams(String),

    /// A matrix passed to `rotate` was not orthogonal.
    #[error("matrix is not orthogonal (max deviation {0:.3e})")]
    NotOrthogonal(f64),

    /// A supplied basis was not orthonormal.
    #[error("basis is not orthonormal (max deviation {0:.3e})")]
    BadBasis(f64),

    /// An observable list failed the orthonormal-basis invariants.
    #[error("invalid observable set: {0}")]
    BadLooSet(String),

    #[error("family does not expose parameter `{0}`")]
    UnknownParam(String),

    #[error("bad sweep range: {0}")]
    BadRange(String),

    /// An intermediate quantity fell outside its numerically expected range,
    /// e.g. a correlation matrix with an imaginary residue.
    #[error("numerical defect: {0}")]
    Numerics(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
