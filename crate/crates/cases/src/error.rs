use thiserror::Error;

/// Errors raised by the case-study models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("effective SPF {spf} is not positive")]
    NonPositiveSpf { spf: f64 },
    #[error("action {0} is not one of the configured options")]
    UnknownOption(f64),
    #[error("fluid temperature bounds cannot be met at step {step}")]
    InfeasibleDispatch { step: usize },
}

impl From<CaseError> for voi_core::VoiError {
    fn from(e: CaseError) -> Self {
        voi_core::VoiError::Model(e.to_string())
    }
}
