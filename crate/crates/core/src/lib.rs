//! Exact computational toolkit for Cartesian convexity of symmetric diagonal
//! subsets of R^m x R^m and for the nonlocal supremal functionals they induce.
//!
//! A scene is a finite union E = A_1 x A_1 ∪ ... ∪ A_N x A_N of Cartesian
//! squares with compact bases (polytopes or finite point sets). The crate
//! enumerates the maximal squares of E, iterates the Cartesian convexification
//! E_k -> E_{k+1}, evaluates the induced supremand W, its Cartesian level
//! convex envelope, the supremal functional J_W on simple functions together
//! with its relaxation, and the L^p approximations I^p_W used to probe the
//! Gamma-limit.
//!
//! All set predicates run in exact rational arithmetic; floating point is
//! confined to Euclidean distance values and the derivative-free optimizer.

pub mod rational;
pub mod geometry;
pub mod squares;
pub mod hull;
pub mod supremand;
pub mod functional;
pub mod lp_approx;
pub mod scene;
pub mod selftest;
pub mod cli;

/// Crate-wide error taxonomy. Schema and validation problems map to CLI exit
/// code 1, resource caps to 2, and internal verification failures (which
/// always signal a bug, never a legitimate negative answer) to 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {dim} for {op}")]
    Unsupported { dim: usize, op: &'static str },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("resource limit exceeded: {what} = {got} > {limit}")]
    Limit {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("convexification did not converge at level {level}")]
    NonConvergence { level: String },
    #[error("internal verification failure: {0}")]
    Verification(String),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch { .. }
            | Error::Unsupported { .. }
            | Error::EmptyInput(_)
            | Error::Invalid(_) => 1,
            Error::Limit { .. } => 2,
            Error::NonConvergence { .. } | Error::Verification(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
