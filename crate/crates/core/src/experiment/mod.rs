//! Replicated simulation studies and the CSV workflow.

pub mod config;
pub mod csv_pipeline;
pub mod output;
pub mod runner;
pub mod summary;

pub use config::{ClassifierChoice, ExperimentConfig, ExperimentMode, SimulationTag};
pub use csv_pipeline::{run_csv_pipeline, PipelineConfig, PipelineReport, TestSource};
pub use output::{emit_outputs, OutputFiles};
pub use runner::{run_classification_experiment, run_experiment, run_subspace_experiment, ExperimentOutput, MetricKind, ReplicateResult};
pub use summary::{summarize, SummaryRow};
