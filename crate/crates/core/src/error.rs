use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sobolev index out of range: {0}")]
    SobolevIndex(String),

    #[error("field has nonzero mean (|c(0)| = {mean:.3e}); homogeneous norms with s = {s} require mean-zero data")]
    NonzeroMean { s: f64, mean: f64 },

    #[error("norm of the charge profile diverges in {space}")]
    DivergentNorm { space: String },

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("reality flag not set; operation needs a real-valued field")]
    NotReal,

    #[error("model configuration: {0}")]
    ModelConfig(String),

    #[error("picard iteration did not converge in {max_iter} iterations (last decrement {decrement:.3e}, contraction estimate {contraction:.3})")]
    NoConvergence {
        max_iter: usize,
        decrement: f64,
        contraction: f64,
    },

    #[error("trajectory left the certified ball: |u| = {norm:.6e} > 2 rho = {limit:.6e}")]
    BallViolation { norm: f64, limit: f64 },

    #[error("trajectory node t = {t} outside the certified interval [{lo}, {hi}]")]
    NodeOutOfInterval { t: f64, lo: f64, hi: f64 },

    #[error("certified step size underflow: T(rho) = {step:.3e} at rho = {rho:.3e}")]
    StepUnderflow { step: f64, rho: f64 },

    #[error("numerical integrity failure: {0}")]
    Integrity(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("state file: {0}")]
    StateFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
