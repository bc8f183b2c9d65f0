use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported Laguerre degree {degree} (maximum {max})")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("Cauchy transform evaluated within {distance:e} of a node")]
    PoleEvaluation { distance: f64 },

    #[error("ill-conditioned moment transform: |d_0| = {d0_abs:e} below threshold {threshold:e}")]
    IllConditionedTransform { d0_abs: f64, threshold: f64 },

    #[error("insufficient moments: need at least {required}, got {got}")]
    Length { required: usize, got: usize },

    #[error("singular pencil: condition estimate {condition:e}")]
    SingularPencil { condition: f64 },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("underdispersed moments: gamma_2 = {gamma2} <= gamma_1^2 = {gamma1_sq}")]
    Underdispersed { gamma2: f64, gamma1_sq: f64 },

    #[error("insufficient moments for order {order}: only {available} available")]
    InsufficientMoments { order: usize, available: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("cannot normalize a field with no positive mass")]
    Normalization,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 4,
            Error::IllConditionedTransform { .. }
            | Error::SingularPencil { .. }
            | Error::NoConvergence
            | Error::Underdispersed { .. }
            | Error::Normalization
            | Error::PoleEvaluation { .. } => 3,
            _ => 2,
        }
    }
}
