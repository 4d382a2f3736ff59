//! Batch front end: problem registry, configuration, analysis dispatch and
//! reproducible report output.

pub mod config;
mod error;
pub mod output;
pub mod registry;
pub mod run;

pub use config::ConfigDocument;
pub use error::CliError;
pub use registry::{list_problems, registered_names, registry, ProblemListing};
pub use run::{execute, run, Analysis, AnalysisRequest, Outcome, ReportDocument, RunManifest, RunOutput};
