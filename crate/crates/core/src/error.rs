use thiserror::Error;

/// Failures raised while building or verifying chain objects.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SovError {
    #[error("invalid spin: two_s must be at least 1 (got {0})")]
    InvalidSpin(u32),

    #[error("chain has no sites")]
    EmptyChain,

    #[error("twist is proportional to the identity")]
    SimpleSpectrumViolation,

    #[error("twist is singular (k1*k2 = 0)")]
    SingularTwist,

    #[error("twist eigenvalues coincide (k1 = k2)")]
    DegenerateTwistEigenvalues,

    #[error("inhomogeneities of sites {a} and {b} collide (xi_a - xi_b - {k}*eta = {gap:e})")]
    GenericityViolation { a: usize, b: usize, k: i64, gap: f64 },

    #[error("grid nodes ({a},{ha}) and ({b},{hb}) coincide")]
    NodeCollision { a: usize, ha: usize, b: usize, hb: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("covector family is degenerate: rank {rank} < {dim}")]
    DegenerateBasis { rank: usize, dim: usize },

    #[error("transfer matrix spectrum is nearly degenerate (min gap {gap:e})")]
    NearDegenerateSpectrum { gap: f64 },

    #[error("distinct solutions found: {found}, expected {expected}")]
    CountMismatch { found: usize, expected: usize },

    #[error("C_zeta system is singular at zeta = {zeta}")]
    SingularCZeta { zeta: num_complex::Complex64 },

    #[error("Q root {root} lies on forbidden node {node}")]
    RootOnForbiddenNode { root: num_complex::Complex64, node: num_complex::Complex64 },

    #[error("Q-operator is not invertible at {0}")]
    NonInvertibleQ(num_complex::Complex64),

    #[error("residual {residual:e} exceeds tolerance {tolerance:e} in {what}")]
    ResidualTooLarge { what: String, residual: f64, tolerance: f64 },

    #[error("no admissible sample found after {0} attempts")]
    SamplingExhausted(usize),
}

pub type Result<T> = std::result::Result<T, SovError>;
