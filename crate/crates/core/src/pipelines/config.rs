use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::datagen::{DistributionSpec, GenerationConfig, GridSpec, NoiseSpec, SigmaScale};
use crate::ml::{Head, ModelSpec, NnSpec};
use crate::models::{DerivedObservable, ModelRegistry, Transform};
use crate::ode::SolverConfig;

const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DataNeeds,
    Augmentation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Windowing {
    pub w_in: usize,
    pub w_out: usize,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_smoothing() -> usize {
    7
}

/// One experiment, as read from a JSON file with `"schema": 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub kind: ExperimentKind,
    /// Experiment id written to every report row.
    pub id: String,
    /// Synthetic data recipe. Optional for augmentation, which defaults to
    /// the SIR new-case setup.
    #[serde(default)]
    pub generation: Option<GenerationConfig>,
    /// Defaults to 5→3 for data-needs and 7→7 for augmentation.
    #[serde(default)]
    pub windowing: Option<Windowing>,
    /// Series column to forecast; defaults to the first column.
    #[serde(default)]
    pub column: Option<String>,
    /// Data-needs: models to benchmark. Augmentation: at most one network
    /// spec, defaulting to a Student's t net with two 20-unit layers.
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub dataset_sizes: Vec<usize>,
    #[serde(default)]
    pub real_data_path: Option<PathBuf>,
    /// Index (into the ingested file) of the first day withheld from training.
    #[serde(default)]
    pub train_cutoff_index: Option<usize>,
    /// Moving-average window applied to real (and synthetic) augmentation
    /// series; 1 disables smoothing.
    #[serde(default = "default_smoothing")]
    pub smoothing_window: usize,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Write measured training times; otherwise the `seconds` column is 0
    /// so reports are reproducible byte for byte.
    #[serde(default)]
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Read, parse, resolve relative paths against the file's directory,
    /// and validate.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::FileError { path: path.into(), source })?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(p) = &cfg.real_data_path {
            if p.is_relative() {
                cfg.real_data_path = Some(base.join(p));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Use `seed` for both the experiment and the data generation.
    pub fn override_seed(&mut self, seed: u64) {
        self.master_seed = seed;
        if let Some(g) = &mut self.generation {
            g.master_seed = seed;
        }
    }

    pub fn windowing(&self) -> Windowing {
        self.windowing.unwrap_or(match self.kind {
            ExperimentKind::DataNeeds => Windowing { w_in: 5, w_out: 3, stride: 1 },
            ExperimentKind::Augmentation => Windowing { w_in: 7, w_out: 7, stride: 1 },
        })
    }

    /// Generation config with the augmentation default filled in.
    pub fn generation(&self) -> GenerationConfig {
        match (&self.generation, self.kind) {
            (Some(g), _) => g.clone(),
            (None, _) => default_augmentation_generation(self.master_seed),
        }
    }

    /// The network trained by the augmentation experiment.
    pub fn augmentation_network(&self) -> NnSpec {
        match self.models.first() {
            Some(ModelSpec::Nn(spec)) => spec.clone(),
            _ => NnSpec { head: Head::StudentT, ..NnSpec::default() },
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {} (expected {SCHEMA_VERSION})", self.schema));
        }
        if self.id.is_empty() {
            return bad("id must not be empty".into());
        }
        let w = self.windowing();
        if w.w_in == 0 || w.w_out == 0 || w.stride == 0 {
            return bad("w_in, w_out and stride must be positive".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction must be in (0, 1), got {}", self.test_fraction));
        }
        for m in &self.models {
            m.validate().map_err(|e| PipelineError::Config(format!("model `{}`: {e}", m.label())))?;
        }
        let mut labels: Vec<String> = self.models.iter().map(ModelSpec::label).collect();
        labels.sort();
        if let Some(d) = labels.windows(2).find(|p| p[0] == p[1]) {
            return bad(format!("duplicate model label `{}`; set distinct `name`s", d[0]));
        }
        let generation = self.generation();
        let registry = ModelRegistry::with_builtins();
        let system = generation.validate(&registry).map_err(|e| PipelineError::Config(e.to_string()))?;
        if let Some(c) = &self.column {
            if !generation.resolved_observables(system.as_ref()).iter().any(|o| &o.name == c) {
                return bad(format!("column `{c}` is not an observable of the generation config"));
            }
        }
        match self.kind {
            ExperimentKind::DataNeeds => {
                if self.generation.is_none() {
                    return bad("data_needs requires `generation`".into());
                }
                if self.models.is_empty() {
                    return bad("data_needs requires at least one model".into());
                }
                if self.dataset_sizes.is_empty() {
                    return bad("data_needs requires `dataset_sizes`".into());
                }
                if self.dataset_sizes.windows(2).any(|p| p[0] >= p[1]) {
                    return bad("dataset_sizes must be strictly ascending".into());
                }
                if self.dataset_sizes[0] < 2 {
                    return bad("every dataset size must be at least 2 (train and test series)".into());
                }
            }
            ExperimentKind::Augmentation => {
                if self.real_data_path.is_none() {
                    return bad("augmentation requires `real_data_path`".into());
                }
                let Some(cutoff) = self.train_cutoff_index else {
                    return bad("augmentation requires `train_cutoff_index`".into());
                };
                if self.smoothing_window == 0 {
                    return bad("smoothing_window must be at least 1".into());
                }
                let needed = w.w_in + w.w_out;
                let available = (cutoff + 1).saturating_sub(self.smoothing_window);
                if available < needed {
                    return Err(PipelineError::CutoffTooEarly { cutoff, available, needed });
                }
                if self.models.len() > 1 || self.models.iter().any(|m| !matches!(m, ModelSpec::Nn(s) if s.head == Head::StudentT)) {
                    return bad("augmentation takes at most one model, a network with the student_t head".into());
                }
            }
        }
        Ok(())
    }
}

/// 100 SIR new-case series for Germany-sized population: β ~ U(0.32, 0.35),
/// γ ~ U(0.123, 0.125), I₀ = 100, additive noise at 2% of each series' max.
pub fn default_augmentation_generation(master_seed: u64) -> GenerationConfig {
    let population = 83_166_711.0;
    let c = |value: f64| DistributionSpec::Constant { value };
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
        grid: GridSpec::Uniform { start: 0.0, step: 1.0, count: 101 },
        solver: SolverConfig::default(),
        method: Default::default(),
        observables: vec![DerivedObservable::new("new_cases", Transform::Difference { state: "C_sigma".into() })],
        noise: NoiseSpec::AdditiveGaussian { sigma: 0.02, scale: SigmaScale::SeriesMax, targets: vec![] },
        sparsifier: None,
        n_series: 100,
        master_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data_needs_json() -> String {
        r#"{
            "schema": 1,
            "kind": "data_needs",
            "id": "dn",
            "generation": {
                "system": "linear_decay",
                "parameters": {"k": {"kind": "constant", "value": 0.1}},
                "initial_conditions": {"y": {"kind": "uniform", "low": 1, "high": 10}},
                "grid": {"kind": "uniform", "start": 0, "step": 1, "count": 20},
                "n_series": 1,
                "master_seed": 3
            },
            "models": [{"family": "linear"}],
            "dataset_sizes": [10, 20],
            "master_seed": 3,
            "output_dir": "out"
        }"#
        .into()
    }

    #[test]
    fn parses_and_applies_defaults() {
        let cfg = ExperimentConfig::from_json(&data_needs_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.windowing(), Windowing { w_in: 5, w_out: 3, stride: 1 });
        assert_eq!(cfg.test_fraction, 0.2);
        assert!(!cfg.record_timings);
    }

    #[test]
    fn unknown_and_missing_keys() {
        let json = data_needs_json().replace("\"id\"", "\"colour\": 1, \"id\"");
        let err = ExperimentConfig::from_json(&json).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
        let json = data_needs_json().replace("\"schema\": 1,", "");
        assert!(ExperimentConfig::from_json(&json).is_err());
    }

    #[test]
    fn semantic_validation() {
        let base = ExperimentConfig::from_json(&data_needs_json()).unwrap();
        let mut c = base.clone();
        c.schema = 2;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.dataset_sizes = vec![20, 10];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.test_fraction = 1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.models.push(c.models[0].clone());
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.column = Some("z".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn augmentation_cutoff_checked() {
        let json = r#"{"schema": 1, "kind": "augmentation", "id": "aug", "real_data_path": "r.csv",
                       "train_cutoff_index": 19, "master_seed": 1, "output_dir": "o"}"#;
        let cfg = ExperimentConfig::from_json(json).unwrap();
        assert!(matches!(cfg.validate(), Err(PipelineError::CutoffTooEarly { cutoff: 19, available: 13, needed: 14 })));
        let cfg = ExperimentConfig { train_cutoff_index: Some(20), ..cfg };
        cfg.validate().unwrap();
        assert_eq!(cfg.generation().n_series, 100);
        assert_eq!(cfg.augmentation_network().hidden, vec![20, 20]);
        assert_eq!(cfg.augmentation_network().head, Head::StudentT);
    }

    #[test]
    fn seed_override_reaches_generation() {
        let mut cfg = ExperimentConfig::from_json(&data_needs_json()).unwrap();
        cfg.override_seed(77);
        assert_eq!((cfg.master_seed, cfg.generation.as_ref().unwrap().master_seed), (77, 77));
    }
}
