#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use simgen::datagen::{generate, GenerationConfig, GridSpec, NoiseSpec};
use simgen::pipelines::{default_augmentation_generation, ExperimentConfig};

pub const GERMANY: f64 = 83_166_711.0;

/// Noiseless linear decay with random starting values: every window target
/// is an exact linear function of its inputs.
pub fn linear_decay_generation(seed: u64) -> Value {
    json!({
        "system": "linear_decay",
        "parameters": {"k": {"kind": "constant", "value": 0.15}},
        "initial_conditions": {"y": {"kind": "uniform", "low": 1.0, "high": 10.0}},
        "grid": {"kind": "uniform", "start": 0.0, "step": 1.0, "count": 20},
        "solver": {"rtol": 1e-12, "atol": 1e-14},
        "n_series": 1,
        "master_seed": seed
    })
}

/// SIR infected fraction with lognormal measurement noise on 20 days.
pub fn sir_fraction_generation(seed: u64) -> Value {
    json!({
        "system": "sir",
        "parameters": {
            "beta": {"kind": "uniform", "low": 0.2, "high": 0.5},
            "gamma": {"kind": "uniform", "low": 0.05, "high": 0.2},
            "N": {"kind": "constant", "value": 1000.0}
        },
        "initial_conditions": {
            "S": {"kind": "constant", "value": 990.0},
            "I": {"kind": "constant", "value": 10.0},
            "R": {"kind": "constant", "value": 0.0}
        },
        "grid": {"kind": "uniform", "start": 0.0, "step": 2.0, "count": 20},
        "observables": [{
            "name": "infected_fraction",
            "transform": {"kind": "ratio", "numerator": ["I"], "denominator": {"kind": "parameter", "name": "N"}}
        }],
        "noise": {"kind": "multiplicative_lognormal", "sigma_log": 0.1},
        "n_series": 1,
        "master_seed": seed
    })
}

pub fn data_needs_config(id: &str, generation: Value, models: Value, sizes: &[usize], seed: u64, out: &Path) -> Value {
    json!({
        "schema": 1,
        "kind": "data_needs",
        "id": id,
        "generation": generation,
        "models": models,
        "dataset_sizes": sizes,
        "master_seed": seed,
        "output_dir": out
    })
}

pub fn parse_experiment(v: &Value) -> ExperimentConfig {
    let cfg = ExperimentConfig::from_json(&v.to_string()).expect("valid experiment json");
    cfg.validate().expect("valid experiment");
    cfg
}

pub fn write_json(path: &Path, v: &Value) -> PathBuf {
    std::fs::write(path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_path_buf()
}

/// A single simulated new-case series standing in for observed data:
/// SIR with parameters from the synthetic prior, multiplicative noise,
/// `days` daily values written as `date,value`.
pub fn write_simulated_observations(path: &Path, days: usize, seed: u64) {
    let mut cfg: GenerationConfig = default_augmentation_generation(seed);
    cfg.n_series = 1;
    cfg.grid = GridSpec::Uniform { start: 0.0, step: 1.0, count: days + 1 };
    cfg.noise = NoiseSpec::MultiplicativeLognormal { sigma_log: 0.05, targets: vec![] };
    let series = &generate(&cfg).expect("truth series").series[0];
    let start = chrono::NaiveDate::from_ymd_opt(2020, 2, 20).unwrap();
    let mut text = String::from("date,value\n");
    for (k, v) in series.values[0].iter().enumerate() {
        let date = start + chrono::Days::new(k as u64);
        text.push_str(&format!("{date},{v}\n"));
    }
    std::fs::write(path, text).unwrap();
}

/// Augmentation config on simulated observations: `observed` smoothed
/// training points before the cutoff, synthetic series covering the same
/// early epidemic phase.
pub fn augmentation_config(data: &Path, observed: usize, seed: u64, out: &Path) -> Value {
    let smoothing = 7;
    let mut generation = serde_json::to_value(default_augmentation_generation(seed)).unwrap();
    generation["grid"] = json!({"kind": "uniform", "start": 0.0, "step": 1.0, "count": observed + smoothing + 15});
    json!({
        "schema": 1,
        "kind": "augmentation",
        "id": "augmentation",
        "generation": generation,
        "real_data_path": data,
        "train_cutoff_index": observed + smoothing - 1,
        "smoothing_window": smoothing,
        "master_seed": seed,
        "output_dir": out
    })
}
