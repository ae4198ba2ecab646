use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::report::{create_output_dir, write_manifest, write_report};
use super::{ExperimentConfig, ExperimentKind, PipelineError, ReportRow};
use crate::datagen::{generate_range, rng_from_seed, seed_for, GenerationConfig};
use crate::ml::{make_windows, metric_nrmse, student_t_nll, Trainer, WindowedDataset};
use crate::models::ModelRegistry;

/// Partition series ids `0..n` into sorted `(train, test)` sets with
/// `max(1, round(test_fraction·n))` test series (at least one kept for
/// training).
pub fn split_series(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng_from_seed(seed));
    let mut test = ids[..n_test].to_vec();
    let mut train = ids[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}

/// Values of `column` (or the first column) of every generated series.
pub(crate) fn generate_column(
    generation: &GenerationConfig,
    column: Option<&str>,
    n: usize,
    experiment: &str,
) -> Result<Vec<Vec<f64>>, PipelineError> {
    let series = generate_range(generation, &ModelRegistry::with_builtins(), 0..n)
        .map_err(|source| PipelineError::Generation { experiment: experiment.into(), source })?;
    Ok(series
        .into_iter()
        .map(|s| match column {
            Some(c) => s.column(c).expect("column validated against the observables").to_vec(),
            None => s.values[0].clone(),
        })
        .collect())
}

/// Benchmark every model at every dataset size and write `report.csv` and
/// `manifest.json` to the output directory.
///
/// The largest size is generated once; smaller sizes use its prefixes, so
/// they are nested subsets. Test series are held out whole.
pub fn run_data_needs(config: &ExperimentConfig) -> Result<Vec<ReportRow>, PipelineError> {
    let trainers: Vec<&dyn Trainer> = config.models.iter().map(|m| m as &dyn Trainer).collect();
    run_data_needs_with(config, &trainers)
}

/// As [`run_data_needs`] with caller-supplied model trainers in place of
/// `config.models`.
pub fn run_data_needs_with(config: &ExperimentConfig, trainers: &[&dyn Trainer]) -> Result<Vec<ReportRow>, PipelineError> {
    if config.kind != ExperimentKind::DataNeeds {
        return Err(PipelineError::Config("not a data_needs experiment".into()));
    }
    config.validate()?;
    let id = config.id.as_str();
    let w = config.windowing();
    let largest = *config.dataset_sizes.last().expect("validated non-empty");
    let values = generate_column(&config.generation(), config.column.as_deref(), largest, id)?;

    let mut splits = Vec::with_capacity(config.dataset_sizes.len());
    for &size in &config.dataset_sizes {
        let split_seed = seed_for(config.master_seed, size as u64);
        let (train_ids, test_ids) = split_series(size, config.test_fraction, split_seed);
        let window = |ids: &[usize]| -> Result<WindowedDataset, PipelineError> {
            let set: Vec<&[f64]> = ids.iter().map(|&i| values[i].as_slice()).collect();
            make_windows(&set, w.w_in, w.w_out, w.stride).map_err(|source| PipelineError::Training {
                experiment: id.into(),
                model: "windowing".into(),
                size,
                source,
            })
        };
        splits.push((size, split_seed, window(&train_ids)?, window(&test_ids)?));
    }

    let cells: Vec<(usize, usize)> =
        (0..trainers.len()).flat_map(|m| (0..splits.len()).map(move |s| (m, s))).collect();
    let rows: Vec<Result<ReportRow, PipelineError>> = cells
        .par_iter()
        .map(|&(m, s)| {
            let trainer = trainers[m];
            let (size, split_seed, train, test) = &splits[s];
            let seed = seed_for(*split_seed, 1 + m as u64);
            let err = |source| PipelineError::Training { experiment: id.into(), model: trainer.label(), size: *size, source };
            let start = Instant::now();
            let model = trainer.train(train, seed).map_err(err)?;
            let predictions = model.predict_batch(&test.x);
            let seconds = if config.record_timings { start.elapsed().as_secs_f64() } else { 0.0 };
            let flat: Vec<f64> = predictions.concat();
            let metrics = metric_nrmse(test.y.as_slice(), &flat).map_err(err)?;
            let mut nll = None;
            if model.predict_distribution(test.x.row(0)).is_some() {
                let mut total = 0.0;
                for r in 0..test.len() {
                    let dist = model.predict_distribution(test.x.row(r)).expect("probabilistic model");
                    total += student_t_nll(&dist, test.y.row(r)).map_err(err)?;
                }
                nll = Some(total / test.len() as f64);
            }
            Ok(ReportRow {
                experiment: id.into(),
                model: trainer.label(),
                size: *size,
                seed,
                rmse: Some(metrics.rmse),
                nrmse: Some(metrics.nrmse),
                nll,
                seconds,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    create_output_dir(&config.output_dir)?;
    write_report(&config.output_dir.join("report.csv"), &rows)?;
    write_manifest(&config.output_dir, config, &["report.csv"])?;
    Ok(rows)
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn split_sizes() {
        let (train, test) = split_series(100, 0.2, 1);
        assert_eq!((train.len(), test.len()), (80, 20));
        let (train, test) = split_series(2, 0.2, 1);
        assert_eq!((train.len(), test.len()), (1, 1));
        assert_eq!(split_series(50, 0.3, 9), split_series(50, 0.3, 9));
    }

    proptest! {
        #[test]
        fn split_partitions_ids(n in 2usize..300, f in 0.01f64..0.99, seed in any::<u64>()) {
            let (train, test) = split_series(n, f, seed);
            prop_assert!(!train.is_empty() && !test.is_empty());
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
