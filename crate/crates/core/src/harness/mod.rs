//! Experiment orchestration: configuration, end-to-end runs, scoring of
//! external predictions, and comparison tables.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod scoring;

pub use config::{ExperimentConfig, FeatureSpec, Vectorizer};
pub use pipeline::{run_experiment, train_experiment, Featurizer, LoadedRun, RunOutcome, RunRecord};
pub use report::{emit_comparison, ComparisonEntry, ReportFormat};
pub use scoring::{score_aligned, score_predictions};
