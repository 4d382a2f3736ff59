//! Value-of-information analysis for stochastic decision problems.
//!
//! A [`DecisionProblem`] bundles a finite action space, a schema of scalar
//! uncertain parameters with priors, and a utility evaluator. The
//! [`engine`] module solves the prior decision problem and estimates the
//! expected value of perfect and imperfect information by Monte Carlo,
//! exact enumeration, and grid quadrature over posteriors.

pub mod distributions;
pub mod engine;
pub mod error;
pub mod inference;
pub mod problem;
pub mod rng;
pub mod stats;

pub use distributions::DistributionSpec;
pub use engine::{
    evii, evii_with_table, evpi, net_benefit, outcome_distribution, sensitivity_sweep, solve_prior,
    utility_table, ActionFrequency, ActionStat, Backend, EstimatorConfig, EviiMethod, Histogram,
    PriorSolution, Quantile, SweepAnalysis, SweepRow, UtilityTable, VoiKind, VoiReport, MAX_ENUMERATION,
};
pub use error::{Result, VoiError};
pub use inference::{conjugate_gaussian_posterior, grid_posterior, GridPosterior, GridSpec};
pub use problem::{
    evaluate_utility, validate_problem, Action, ActionSpace, DecisionProblem, MeasurementModel,
    Parameter, ParameterSchema, ProblemMetadata, Role, ScenarioSample, TimeBasis, Utility,
    ValidationReport,
};
