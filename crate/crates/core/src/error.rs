use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("island box corner {0} is not on the coarse 4x4 grid")]
    Alignment(f64),

    #[error("degenerate triangle (signed area {0:e})")]
    Geometry(f64),

    #[error("matrix is not positive definite: {0}")]
    Definiteness(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("Neumann kernel has dimension {found}, expected 3")]
    Extraction { found: usize },

    #[error("prolongation extraction failed: {0}")]
    Prolongation(String),

    #[error("eta is numerically singular (condition estimate {0:e})")]
    SingularEta(f64),

    #[error("SMW capacitance matrix eta - v^T M_LL v is singular or indefinite: {0}")]
    Capacitance(String),

    #[error("dimension {dim} exceeds the dense cap of {cap}")]
    DenseCap { dim: usize, cap: usize },

    #[error("CG breakdown at iteration {iteration}: {reason}")]
    Breakdown { iteration: usize, reason: String },

    #[error("zero vector: {0}")]
    ZeroVector(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix market parse error at line {line}: {msg}")]
    MatrixMarket { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
