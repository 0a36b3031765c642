use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("invalid arm configuration: {0}")]
    Configuration(String),

    #[error("orientation ambiguity: relative rotation of {angle} rad is not below pi")]
    Ambiguity { angle: f64 },

    #[error("stiffness reduction failed: {0}")]
    Reduction(String),

    #[error("set library is empty")]
    EmptyLibrary,

    #[error("invalid task set: {0}")]
    InvalidSet(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("simulation fault at t={t:.4} s: {detail}")]
    SimulationFault { t: f64, detail: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
