use std::path::Path;

use serde::Serialize;

use super::{ExperimentConfig, PipelineError};
use crate::datagen::format_float;

pub const REPORT_HEADER: [&str; 8] = ["experiment", "model", "size", "seed", "rmse", "nrmse", "nll", "seconds"];

/// One (model, dataset size) cell of an experiment report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub model: String,
    pub size: usize,
    pub seed: u64,
    /// Absent when no realized values exist to score against.
    pub rmse: Option<f64>,
    pub nrmse: Option<f64>,
    /// Mean over test windows of the horizon-summed NLL; probabilistic
    /// models only.
    pub nll: Option<f64>,
    pub seconds: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub(crate) fn write_report(path: &Path, rows: &[ReportRow]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(PipelineError::output)?;
    w.write_record(REPORT_HEADER).map_err(PipelineError::output)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.model.clone(),
            r.size.to_string(),
            r.seed.to_string(),
            opt(r.rmse),
            opt(r.nrmse),
            opt(r.nll),
            format_float(r.seconds),
        ])
        .map_err(PipelineError::output)?;
    }
    w.flush().map_err(PipelineError::output)
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    experiment: &'a ExperimentConfig,
    outputs: &'a [&'a str],
}

/// `manifest.json` echoing the resolved config.
pub(crate) fn write_manifest(dir: &Path, config: &ExperimentConfig, outputs: &[&str]) -> Result<(), PipelineError> {
    let mut resolved = config.clone();
    resolved.generation = Some(config.generation());
    resolved.windowing = Some(config.windowing());
    let manifest = Manifest { schema: 1, experiment: &resolved, outputs };
    let text = serde_json::to_string_pretty(&manifest).map_err(PipelineError::output)?;
    std::fs::write(dir.join("manifest.json"), text + "\n").map_err(PipelineError::output)
}

pub(crate) fn create_output_dir(dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::FileError { path: dir.into(), source })
}
