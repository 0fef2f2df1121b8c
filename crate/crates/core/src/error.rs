use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("covector is zero: point is not in T*_0")]
    ZeroCovector,

    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid contact form: {0}")]
    InvalidForm(String),

    #[error("invalid map primitive: {0}")]
    InvalidPrimitive(String),

    #[error("contact flow integration diverged after {step} steps (increase the step count)")]
    FlowDivergence { step: usize },

    #[error("degenerate transversal: |lambda(v)| = {0:e}")]
    DegenerateTransversal(f64),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("root solver did not converge after {0} iterations")]
    SolverNonConvergence(usize),

    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(i128),

    #[error("matrix is singular")]
    Singular,

    #[error("not representable by a contactomorphism: I(V) != V")]
    NotContactRepresentable,

    #[error("trivial class")]
    TrivialClass,

    #[error("direction grids do not match")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
