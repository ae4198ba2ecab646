//! Config-driven experiments and the command-line front end.

mod augmentation;
pub mod cli;
mod config;
mod data_needs;
mod ingest;
mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use augmentation::{run_augmentation, AugmentationOutcome, ForecastRow, AUGMENTED, REAL_ONLY};
pub use config::{default_augmentation_generation, ExperimentConfig, ExperimentKind, Windowing};
pub use data_needs::{run_data_needs, run_data_needs_with, split_series};
pub use ingest::{ingest_real_csv, RealSeries};
pub use report::{ReportRow, REPORT_HEADER};

use crate::datagen::DatagenError;
use crate::ml::MlError;
use crate::models::ModelError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("experiment `{experiment}`: {source}")]
    Generation {
        experiment: String,
        #[source]
        source: DatagenError,
    },
    #[error("experiment `{experiment}`, model `{model}`, size {size}: {source}")]
    Training {
        experiment: String,
        model: String,
        size: usize,
        #[source]
        source: MlError,
    },
    #[error("experiment `{experiment}`: {source}")]
    Model {
        experiment: String,
        #[source]
        source: ModelError,
    },
    #[error("cutoff index {cutoff} leaves {available} training points, need at least {needed}")]
    CutoffTooEarly { cutoff: usize, available: usize, needed: usize },
    #[error("{path}: line {line}: {message}")]
    ParseError { path: PathBuf, line: usize, message: String },
    #[error("{path}: line {line}: date {found} does not follow {previous}")]
    NonContiguousDates { path: PathBuf, line: usize, previous: String, found: String },
    #[error("{path}: line {line}: negative case count {value}")]
    NegativeCaseCount { path: PathBuf, line: usize, value: f64 },
    #[error("{path}: {source}")]
    FileError {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing reports: {0}")]
    Output(String),
}

impl PipelineError {
    /// Whether the error stems from the configuration rather than from a
    /// failure while running it.
    pub fn is_config_error(&self) -> bool {
        matches!(self, PipelineError::Config(_) | PipelineError::CutoffTooEarly { .. })
    }

    pub(crate) fn output(e: impl std::fmt::Display) -> Self {
        PipelineError::Output(e.to_string())
    }
}
