use thiserror::Error;

/// Errors surfaced by grid construction, parameter validation, projections,
/// and the iterative solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameter set violates a structural hypothesis (dimension, Hardy
    /// bounds, exponent ranges, coupling weight admissibility).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A scalar argument lies outside the mathematical domain of the
    /// operation (for example a profile evaluated at radius zero).
    #[error("domain error: {0}")]
    Domain(String),

    /// Radial fields built on different grids were combined.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The equation posed to a root-finder has no root in its bracket.
    #[error("no root: {0}")]
    NoRoot(String),

    /// An iteration failed to reach its tolerance within its budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A linear solve lost positive definiteness (pivot check failed).
    #[error("linear solve failure: {0}")]
    LinearSolve(String),

    /// A constrained point was used after drifting off the constraint set.
    #[error("stale constraint point: {0}")]
    StalePoint(String),

    /// The infimum being bracketed is degenerate (attained only at zero).
    #[error("degenerate infimum: {0}")]
    DegenerateInfimum(String),

    /// A min-max construction lacks the required initial geometry.
    #[error("geometry violation: {0}")]
    Geometry(String),

    /// Filesystem failure while reading or writing field data.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
