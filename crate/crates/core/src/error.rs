use thiserror::Error;

/// Errors raised by the solvers, agents and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("non-finite objective value {value} at {at}")]
    NonFinite { value: f64, at: f64 },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("oracle support size {0} exceeds the limit of 4")]
    SupportTooLarge(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("illegal action {action} at step {step}, state {state}")]
    IllegalAction {
        step: usize,
        state: usize,
        action: usize,
    },

    #[error("negative regret gap {gap} at episode {episode}")]
    NegativeGap { episode: usize, gap: f64 },

    #[error("empty policy sequence")]
    NoPolicies,

    #[error("malformed csv: {0}")]
    MalformedCsv(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
