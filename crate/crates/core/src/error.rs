use thiserror::Error;

/// Errors raised while building models, integrating, or analysing results.
#[derive(Debug, Error)]
pub enum Error {
    #[error("photon number {photons} exceeds truncation n_max = {n_max}")]
    Truncation { photons: usize, n_max: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error(
        "norm drifted by {drift:.3e} at t = {time} (dt_step = {dt_step}); try a smaller dt_step"
    )]
    NormDrift { time: f64, drift: f64, dt_step: f64 },

    #[error("integration did not converge: deviation {deviation:.3e} at dt_step = {dt_step}")]
    NotConverged { deviation: f64, dt_step: f64 },

    #[error("energy accounting mismatch of {discrepancy:.3e} at t = {time}")]
    EnergyAccounting { time: f64, discrepancy: f64 },

    #[error("monotone series: no qualifying local maximum")]
    MonotoneSeries,

    #[error("tau tuning failed: {0}")]
    Tuning(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NormDrift { .. }
                | Error::NotConverged { .. }
                | Error::EnergyAccounting { .. }
                | Error::MonotoneSeries
                | Error::Tuning(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
