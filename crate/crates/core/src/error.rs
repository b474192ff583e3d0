use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("scale R = {r:e} is too small: need R >= {needed:e} for at least one point")]
    RTooSmall { r: f64, needed: f64 },
    #[error("point at |omega| = {radius:e} leaves the surface chart (domain radius {domain:e})")]
    SurfaceDomain { radius: f64, domain: f64 },
    #[error("points are not separated at 1/R = {inv_r:e}")]
    NotSeparated { inv_r: f64 },
    #[error("lattice of size {size} exceeds the cap {cap}")]
    LatticeTooLarge { size: u128, cap: usize },
    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("step {step:e} is too coarse: the largest admissible step is {max:e}")]
    StepTooCoarse { step: f64, max: f64 },
    #[error("scale R*max|q| = {scale:e} exceeds double-double resolution ({limit:e})")]
    PrecisionExceeded { scale: f64, limit: f64 },
    #[error("work budget exceeded: {0}")]
    Budget(String),
    #[error("incidence gate failed: {0}")]
    GateFailed(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
