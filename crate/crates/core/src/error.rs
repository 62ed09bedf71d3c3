use thiserror::Error;

/// Errors raised by the spectral operators, the solver and the estimate suites.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be a power of two and at least 16, got n = {n}")]
    InvalidGrid { n: usize },

    #[error("size mismatch: expected {expected} samples, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids (n = {left} vs n = {right})")]
    GridMismatch { left: usize, right: usize },

    #[error("diffusion time must be nonnegative, got {0}")]
    NegativeDiffusion(f64),

    #[error("Biot-Savart needs zero-mean vorticity, mean coefficient is {mean:e}")]
    NonzeroMeanVorticity { mean: f64 },

    #[error("Lebesgue exponent must be >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("block index {q} outside [-1, {q_max}]")]
    BlockOutOfRange { q: i32, q_max: i32 },

    #[error("band [{lo}, {hi}] is invalid for q_max = {q_max}")]
    InvalidBand { lo: i32, hi: i32, q_max: i32 },

    #[error("invalid radial profile: {0}")]
    InvalidProfile(String),

    #[error("velocity is not divergence-free (relative residual {residual:e})")]
    NotDivergenceFree { residual: f64 },

    #[error("dyadic block {q} of the input is zero")]
    ZeroBlock { q: i32 },

    #[error(
        "CFL violation at t = {time}: dt = {dt:e} exceeds limit {limit:e} (max |u| = {u_max:e})"
    )]
    CflViolation {
        time: f64,
        dt: f64,
        limit: f64,
        u_max: f64,
    },

    #[error("non-finite values detected at t = {time}")]
    NonFinite { time: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("missing channels: {}", .0.join(", "))]
    MissingChannels(Vec<String>),

    #[error("twin runs are incompatible: {0}")]
    TwinMismatch(String),

    #[error("invalid snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
