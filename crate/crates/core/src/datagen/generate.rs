use std::collections::BTreeMap;
use std::ops::Range;

use rayon::prelude::*;

use super::{rng_from_seed, seed_for, sparsify_indices, DatagenError, GenerationConfig, SolverMethod};
use crate::models::{evaluate_observable, ModelRegistry};
use crate::ode::{integrate, integrate_implicit, OdeSystem};

/// One simulated (and possibly corrupted) series with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub index: usize,
    /// Child seed the series was generated from.
    pub seed: u64,
    pub parameters: BTreeMap<String, f64>,
    pub initial_conditions: BTreeMap<String, f64>,
    pub times: Vec<f64>,
    pub columns: Vec<String>,
    /// One vector per column, each aligned with `times`.
    pub values: Vec<Vec<f64>>,
}

impl Series {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == name).map(|i| self.values[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// The configuration the dataset was generated from.
    pub config: GenerationConfig,
    pub series: Vec<Series>,
}

impl Dataset {
    pub fn master_seed(&self) -> u64 {
        self.config.master_seed
    }
}

/// Generate `config.n_series` series with the built-in model registry.
pub fn generate(config: &GenerationConfig) -> Result<Dataset, DatagenError> {
    generate_with(config, &ModelRegistry::with_builtins())
}

pub fn generate_with(config: &GenerationConfig, registry: &ModelRegistry) -> Result<Dataset, DatagenError> {
    let series = generate_range(config, registry, 0..config.n_series)?;
    Ok(Dataset { config: config.clone(), series })
}

/// Generate the series with indices in `range`.
///
/// Series `i` depends only on the config and `i`, so any range reproduces
/// the matching slice of a full run. Series are computed in parallel and
/// returned in index order.
pub fn generate_range(
    config: &GenerationConfig,
    registry: &ModelRegistry,
    range: Range<usize>,
) -> Result<Vec<Series>, DatagenError> {
    let system = config.validate(registry)?;
    let results: Vec<Result<Series, DatagenError>> = range
        .into_par_iter()
        .map(|index| generate_series(config, system.as_ref(), index))
        .collect();
    results.into_iter().collect()
}

/// Sample, integrate, observe, corrupt, and sparsify series `index`.
///
/// Random draws happen in a fixed order: parameters (system order), initial
/// conditions (state order), noise (column order), sparsifier.
pub fn generate_series(config: &GenerationConfig, system: &dyn OdeSystem, index: usize) -> Result<Series, DatagenError> {
    let seed = seed_for(config.master_seed, index as u64);
    let mut rng = rng_from_seed(seed);

    let param_names = system.parameter_names();
    let state_names = system.state_names();
    let mut params = Vec::with_capacity(param_names.len());
    for name in &param_names {
        params.push(config.parameters[name].sample(&mut rng)?);
    }
    let mut y0 = Vec::with_capacity(state_names.len());
    for name in &state_names {
        y0.push(config.initial_conditions[name].sample(&mut rng)?);
    }
    let parameters: BTreeMap<String, f64> = param_names.iter().cloned().zip(params.iter().copied()).collect();
    let initial_conditions: BTreeMap<String, f64> = state_names.iter().cloned().zip(y0.iter().copied()).collect();

    let grid = config.grid.to_grid()?;
    let traj = match config.method {
        SolverMethod::Explicit => integrate(system, &params, &y0, &grid, &config.solver),
        SolverMethod::Implicit => integrate_implicit(system, &params, &y0, &grid, &config.solver),
    }
    .map_err(|source| DatagenError::Solver { index, parameters: parameters.clone(), source })?;

    let observables = config.resolved_observables(system);
    let mut outputs = Vec::with_capacity(observables.len());
    for obs in &observables {
        outputs.push(evaluate_observable(obs, &traj, system, &params)?);
    }
    // Differenced columns are one point shorter; align all columns on the
    // shared trailing time points.
    let len = outputs.iter().map(|o| o.values.len()).min().unwrap_or(0);
    let times = outputs
        .iter()
        .find(|o| o.times.len() == len)
        .map(|o| o.times.clone())
        .unwrap_or_default();
    let mut values: Vec<Vec<f64>> = outputs.into_iter().map(|o| o.values[o.values.len() - len..].to_vec()).collect();
    let columns: Vec<String> = observables.iter().map(|o| o.name.clone()).collect();

    for (name, column) in columns.iter().zip(values.iter_mut()) {
        if config.noise.applies_to(name) {
            *column = config.noise.apply(column, &mut rng)?;
        }
    }

    let (times, values) = match &config.sparsifier {
        Some(sp) => {
            let keep = sparsify_indices(times.len(), sp.keep_fraction, &mut rng)?;
            let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<f64>>();
            (pick(&times), values.iter().map(|v| pick(v)).collect())
        }
        None => (times, values),
    };

    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(DatagenError::NonFiniteValues { index });
    }
    Ok(Series { index, seed, parameters, initial_conditions, times, columns, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{DistributionSpec, GridSpec, NoiseSpec, SigmaScale, SparsifierSpec};
    use crate::models::{DerivedObservable, SirCumulative, Transform};
    use crate::ode::{SolverConfig, TimeGrid};

    fn covid_config(n_series: usize) -> GenerationConfig {
        let c = |value: f64| DistributionSpec::Constant { value };
        let population = 83_166_711.0;
        GenerationConfig {
            system: "sir_cumulative".into(),
            parameters: BTreeMap::from([
                ("beta".into(), DistributionSpec::Uniform { low: 0.32, high: 0.35 }),
                ("gamma".into(), DistributionSpec::Uniform { low: 0.123, high: 0.125 }),
                ("N".into(), c(population)),
            ]),
            initial_conditions: BTreeMap::from([
                ("S".into(), c(population - 100.0)),
                ("I".into(), c(100.0)),
                ("R".into(), c(0.0)),
                ("C_sigma".into(), c(0.0)),
            ]),
            grid: GridSpec::Uniform { start: 0.0, step: 1.0, count: 201 },
            solver: SolverConfig::default(),
            method: SolverMethod::Explicit,
            observables: vec![DerivedObservable::new(
                "new_cases",
                Transform::Difference { state: "C_sigma".into() },
            )],
            noise: NoiseSpec::None,
            sparsifier: None,
            n_series,
            master_seed: 2020,
        }
    }

    #[test]
    fn covid_series_have_a_single_positive_peak() {
        let ds = generate(&covid_config(100)).unwrap();
        assert_eq!(ds.series.len(), 100);
        for s in &ds.series {
            let cases = s.column("new_cases").unwrap();
            assert_eq!(cases.len(), 200);
            assert!(cases.iter().all(|&v| v > 0.0));
            let peak = cases.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert!(peak > 0 && peak < cases.len() - 1, "peak at {peak}");
            assert!(cases[..=peak].windows(2).all(|w| w[1] > w[0]));
            assert!(cases[peak..].windows(2).all(|w| w[1] < w[0]));
            let beta = s.parameters["beta"];
            let gamma = s.parameters["gamma"];
            assert!(beta > 0.32 && beta < 0.35 && gamma > 0.123 && gamma < 0.125);
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let mut cfg = covid_config(5);
        cfg.noise = NoiseSpec::AdditiveGaussian { sigma: 0.02, scale: SigmaScale::SeriesMax, targets: vec![] };
        cfg.sparsifier = Some(SparsifierSpec { keep_fraction: 0.5 });
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    }

    #[test]
    fn series_do_not_depend_on_count() {
        let mut cfg = covid_config(10);
        cfg.noise = NoiseSpec::AdditiveGaussian { sigma: 5.0, scale: SigmaScale::Absolute, targets: vec![] };
        let small = generate(&cfg).unwrap();
        cfg.n_series = 11;
        let large = generate(&cfg).unwrap();
        assert_eq!(small.series[..], large.series[..10]);
    }

    #[test]
    fn noiseless_single_series_equals_direct_integration() {
        let cfg = covid_config(1);
        let ds = generate(&cfg).unwrap();
        let s = &ds.series[0];
        let params = vec![s.parameters["beta"], s.parameters["gamma"], s.parameters["N"]];
        let y0 = vec![s.initial_conditions["S"], s.initial_conditions["I"], 0.0, 0.0];
        let grid = TimeGrid::uniform(0.0, 1.0, 201).unwrap();
        let traj = integrate(&SirCumulative, &params, &y0, &grid, &SolverConfig::default()).unwrap();
        let direct = evaluate_observable(&cfg.observables[0], &traj, &SirCumulative, &params).unwrap();
        assert_eq!(s.values[0], direct.values);
        assert_eq!(s.times, direct.times);
    }

    #[test]
    fn mixed_length_columns_are_aligned() {
        let mut cfg = covid_config(1);
        cfg.observables.push(DerivedObservable::state("I"));
        let s = &generate(&cfg).unwrap().series[0];
        assert_eq!(s.values[0].len(), s.values[1].len());
        assert_eq!(s.times.len(), 200);
        assert_eq!(s.times[0], 1.0);
    }

    #[test]
    fn sparsified_series_keep_endpoints() {
        let mut cfg = covid_config(3);
        cfg.sparsifier = Some(SparsifierSpec { keep_fraction: 0.25 });
        for s in generate(&cfg).unwrap().series {
            assert_eq!(s.len(), 50);
            assert_eq!(s.times[0], 1.0);
            assert_eq!(*s.times.last().unwrap(), 200.0);
        }
    }

    #[test]
    fn solver_failures_carry_series_context() {
        let mut cfg = covid_config(2);
        cfg.solver.max_steps = 2;
        match generate(&cfg) {
            Err(DatagenError::Solver { index, parameters, .. }) => {
                assert_eq!(index, 0);
                assert!(parameters.contains_key("beta"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
