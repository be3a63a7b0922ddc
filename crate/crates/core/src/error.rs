use thiserror::Error;

/// Errors raised by the numerical kernels and model builders.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("function undefined at eigenvalue {eigenvalue:.6e}")]
    Domain { eigenvalue: f64 },

    #[error("state is not positive semidefinite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state is not normalized: trace {trace:.12}")]
    Normalization { trace: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("site index error: {0}")]
    Index(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid permutation: {0}")]
    Permutation(String),

    #[error("operator does not commute with parity: commutator norm {commutator:.3e}")]
    Symmetry { commutator: f64 },

    #[error("{sites} sites exceeds the configured maximum of {max_sites} (about {bytes} bytes per dense matrix)")]
    Resource { sites: usize, max_sites: usize, bytes: u128 },

    #[error("invalid channel: {0}")]
    Channel(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("insufficient statistics: {0}")]
    Statistics(String),

    #[error("ill-conditioned unfolding fit: condition number {condition:.3e}")]
    Fit { condition: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
