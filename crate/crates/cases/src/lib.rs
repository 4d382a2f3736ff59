//! Building-energy decision problems for value-of-information analysis.

pub mod ashp;
mod error;
pub mod gshp;
pub mod ventilation;

pub use error::CaseError;
