use std::path::Path;

use serde::{Deserialize, Serialize};
use voi_cases::ashp::AshpParams;
use voi_cases::gshp::GshpConfig;
use voi_cases::ventilation::OfficeConfig;
use voi_core::EstimatorConfig;

use crate::error::CliError;

/// The single editable configuration file. Missing sections and fields take
/// their defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigDocument {
    pub estimator: EstimatorConfig,
    pub ashp: AshpParams,
    pub ventilation: OfficeConfig,
    pub gshp: GshpConfig,
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let err = |message: String| CliError::Config {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        Self::from_json(&text).map_err(|e| err(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
