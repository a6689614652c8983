//! Simulation of the multi-party Gaussian mechanism and its comparison baselines.

pub mod baselines;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod population;
pub mod regression;
pub mod rng;
pub mod run;

pub use baselines::{baseline_randomized_response, baseline_sample, baseline_sample_regression};
pub use config::{ActiveSpec, DeltaRule, ExperimentConfig, QueryName, ThresholdSpec};
pub use experiment::{run_experiment, ExperimentReport, MechanismKind, RunRecord, SummaryRecord};
pub use metrics::evaluate_rmse;
pub use population::{
    generate_population, BudgetGroup, PartyData, Population, PopulationParams, Workload,
};
pub use regression::functional_linreg;
pub use run::{run_centralized, run_mechanism, MechanismRun, PartyOutput};
