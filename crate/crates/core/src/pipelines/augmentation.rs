use std::time::Instant;

use super::data_needs::generate_column;
use super::ingest::ingest_real_csv;
use super::report::{create_output_dir, write_manifest, write_report};
use super::{ExperimentConfig, ExperimentKind, PipelineError, ReportRow};
use crate::datagen::{format_float, seed_for};
use crate::ml::{make_windows, metric_nrmse, nn_train, student_t_nll, ForecastDistribution, MlError, NnSpec, WindowedDataset};
use crate::models::moving_average;

pub const REAL_ONLY: &str = "real_only";
pub const AUGMENTED: &str = "augmented";
const LEVELS: [f64; 2] = [0.5, 0.85];

/// One horizon step of a variant's forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRow {
    pub variant: String,
    /// 1-based horizon step.
    pub h: usize,
    pub mu: f64,
    pub lo50: f64,
    pub hi50: f64,
    pub lo85: f64,
    pub hi85: f64,
    /// Realized (smoothed) value, when the file extends past the cutoff.
    pub actual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationOutcome {
    pub forecasts: Vec<ForecastRow>,
    /// One row per variant, real-only first.
    pub report: Vec<ReportRow>,
}

impl AugmentationOutcome {
    pub fn nll(&self, variant: &str) -> Option<f64> {
        self.report.iter().find(|r| r.model == variant).and_then(|r| r.nll)
    }
}

/// Train the Student's t network on the observed series alone and on the
/// observed series plus synthetic series, with identical seeds, and forecast
/// the `w_out` days after the cutoff. Writes `forecasts.csv`, `report.csv`
/// and `manifest.json`.
pub fn run_augmentation(config: &ExperimentConfig) -> Result<AugmentationOutcome, PipelineError> {
    if config.kind != ExperimentKind::Augmentation {
        return Err(PipelineError::Config("not an augmentation experiment".into()));
    }
    config.validate()?;
    let id = config.id.as_str();
    let w = config.windowing();
    let sw = config.smoothing_window;
    let cutoff = config.train_cutoff_index.expect("validated");
    let path = config.real_data_path.as_ref().expect("validated");
    let model_err = |source| PipelineError::Model { experiment: id.into(), source };

    let real = ingest_real_csv(path)?;
    if cutoff > real.len() {
        return Err(PipelineError::Config(format!(
            "train_cutoff_index {cutoff} is past the end of {} ({} rows)",
            path.display(),
            real.len()
        )));
    }
    // smoothed[j] is the trailing mean ending on day j + sw − 1
    let smoothed = moving_average(&real.values, sw).map_err(model_err)?;
    let n_train = cutoff + 1 - sw;
    let observed = &smoothed[..n_train];
    let actual = &smoothed[n_train..(n_train + w.w_out).min(smoothed.len())];

    let generation = config.generation();
    let synthetic = generate_column(&generation, config.column.as_deref(), generation.n_series, id)?
        .iter()
        .map(|s| moving_average(s, sw))
        .collect::<Result<Vec<_>, _>>()
        .map_err(model_err)?;

    let train_err = |variant: &str, size: usize| {
        let variant = variant.to_string();
        move |source: MlError| PipelineError::Training { experiment: id.into(), model: variant.clone(), size, source }
    };
    let real_ds = make_windows(&[observed], w.w_in, w.w_out, w.stride).map_err(train_err(REAL_ONLY, 1))?;
    let synthetic_ds =
        make_windows(&synthetic, w.w_in, w.w_out, w.stride).map_err(train_err(AUGMENTED, 1 + synthetic.len()))?;
    let augmented_ds = real_ds.concat(&synthetic_ds).map_err(train_err(AUGMENTED, 1 + synthetic.len()))?;

    let spec = config.augmentation_network();
    let seed = seed_for(config.master_seed, spec.seed);
    let spec = NnSpec { seed, ..spec };
    let input = &observed[n_train - w.w_in..];

    let mut forecasts = Vec::new();
    let mut report = Vec::new();
    for (variant, ds, size) in [(REAL_ONLY, &real_ds, 1), (AUGMENTED, &augmented_ds, 1 + synthetic.len())] {
        let (rows, row) = run_variant(config, variant, ds, size, &spec, input, actual)?;
        forecasts.extend(rows);
        report.push(row);
    }

    create_output_dir(&config.output_dir)?;
    write_forecasts(&config.output_dir.join("forecasts.csv"), &forecasts)?;
    write_report(&config.output_dir.join("report.csv"), &report)?;
    write_manifest(&config.output_dir, config, &["forecasts.csv", "report.csv"])?;
    Ok(AugmentationOutcome { forecasts, report })
}

fn run_variant(
    config: &ExperimentConfig,
    variant: &str,
    ds: &WindowedDataset,
    size: usize,
    spec: &NnSpec,
    input: &[f64],
    actual: &[f64],
) -> Result<(Vec<ForecastRow>, ReportRow), PipelineError> {
    let err = |source| PipelineError::Training { experiment: config.id.clone(), model: variant.into(), size, source };
    let start = Instant::now();
    let model = nn_train(ds, spec).map_err(err)?;
    let seconds = if config.record_timings { start.elapsed().as_secs_f64() } else { 0.0 };
    let dist = model.predict_distribution(input).expect("student_t head");
    let mut rows = Vec::with_capacity(dist.steps.len());
    for (k, step) in dist.steps.iter().enumerate() {
        let (lo50, hi50) = step.interval(LEVELS[0]).map_err(err)?;
        let (lo85, hi85) = step.interval(LEVELS[1]).map_err(err)?;
        rows.push(ForecastRow {
            variant: variant.into(),
            h: k + 1,
            mu: step.mu,
            lo50,
            hi50,
            lo85,
            hi85,
            actual: actual.get(k).copied(),
        });
    }
    let (rmse, nrmse, nll) = if actual.is_empty() {
        (None, None, None)
    } else {
        let scored = ForecastDistribution { steps: dist.steps[..actual.len()].to_vec() };
        let m = metric_nrmse(actual, &scored.means()).map_err(err)?;
        (Some(m.rmse), Some(m.nrmse), Some(student_t_nll(&scored, actual).map_err(err)?))
    };
    let row = ReportRow {
        experiment: config.id.clone(),
        model: variant.into(),
        size,
        seed: spec.seed,
        rmse,
        nrmse,
        nll,
        seconds,
    };
    Ok((rows, row))
}

fn write_forecasts(path: &std::path::Path, rows: &[ForecastRow]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(PipelineError::output)?;
    w.write_record(["variant", "h", "mu", "lo50", "hi50", "lo85", "hi85", "actual"]).map_err(PipelineError::output)?;
    for r in rows {
        w.write_record([
            r.variant.clone(),
            r.h.to_string(),
            format_float(r.mu),
            format_float(r.lo50),
            format_float(r.hi50),
            format_float(r.lo85),
            format_float(r.hi85),
            r.actual.map(format_float).unwrap_or_default(),
        ])
        .map_err(PipelineError::output)?;
    }
    w.flush().map_err(PipelineError::output)
}
