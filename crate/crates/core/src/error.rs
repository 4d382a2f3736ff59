use thiserror::Error;

pub type Result<T, E = VoiError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoiError {
    #[error("unknown action index {index} (problem has {count} actions)")]
    UnknownAction { index: usize, count: usize },

    #[error("sample is missing parameter `{0}`")]
    MissingParameter(String),

    #[error("sample has unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("sample has {got} values but the schema has {expected} parameters")]
    SampleShape { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),

    #[error("utility evaluation failed for action {action} at sample {sample}: {message}")]
    Utility {
        action: usize,
        sample: usize,
        message: String,
    },

    #[error("utility is not finite for action {action} at sample {sample}")]
    NonFiniteUtility { action: usize, sample: usize },

    #[error("posterior is degenerate: observation z = {z} has zero likelihood on the whole grid")]
    Posterior { z: f64 },

    #[error("measurement target `{0}` is not a parameter of the problem")]
    UnknownTarget(String),

    #[error("measurement target `{0}` is not marked as measured")]
    NotMeasured(String),

    #[error("sweep has no values")]
    EmptySweep,

    #[error("{0}")]
    Model(String),
}
