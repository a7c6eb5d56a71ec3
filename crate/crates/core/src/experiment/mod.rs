//! Config-driven experiments: dataset generation, training, evaluation,
//! learning curves, ablation sweeps, profile export and numerical audits.

mod audit;
mod config;
mod profiles;
mod runner;

pub use audit::{audit_invariants, ConfigurationAudit, InvariantAudit};
pub use config::{AblationAxis, ExperimentConfig, ModelChoice, SEED_ENV};
pub use profiles::{emit_profiles, profile_table, ProfileTable};
pub use runner::{
    run_experiment, run_noise_ablation, run_time_ablation, write_artifacts, AblationRow, AblationTable, DatasetSummary,
    ExperimentReport, ModelReport, Runner,
};
