//! Model specs, the plug-in training interface, and JSON persistence.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::knn::predict_knn_batch;
use super::{
    fit_forest, fit_knn, fit_linear, fit_tree, nn_train, predict_forest, predict_knn, predict_linear, predict_tree,
    ForecastDistribution, ForestModel, ForestSpec, Head, KnnModel, KnnSpec, LinearModel, LinearSpec, Matrix, MlError,
    NnModel, NnSpec, TreeModel, TreeSpec, WindowedDataset,
};

/// A trained forecaster mapping `w_in` inputs to `w_out` outputs.
pub trait Forecaster: Send + Sync {
    fn predict(&self, x: &[f64]) -> Vec<f64>;

    /// Predictive distribution, for probabilistic models.
    fn predict_distribution(&self, _x: &[f64]) -> Option<ForecastDistribution> {
        None
    }

    fn predict_batch(&self, x: &Matrix) -> Vec<Vec<f64>> {
        (0..x.rows()).into_par_iter().map(|i| self.predict(x.row(i))).collect()
    }
}

/// Something that can be fit to a windowed dataset. Implement this to add a
/// model family to the experiment pipelines.
pub trait Trainer: Send + Sync {
    /// Label used in reports.
    fn label(&self) -> String;

    /// Fit with an explicit seed; deterministic families may ignore it.
    fn train(&self, ds: &WindowedDataset, seed: u64) -> Result<Box<dyn Forecaster>, MlError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Linear(LinearSpec),
    Knn(KnnSpec),
    Tree(TreeSpec),
    Forest(ForestSpec),
    Nn(NnSpec),
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Linear(_) => "linear",
            ModelSpec::Knn(_) => "knn",
            ModelSpec::Tree(_) => "tree",
            ModelSpec::Forest(_) => "forest",
            ModelSpec::Nn(s) if s.head == Head::StudentT => "nn_student_t",
            ModelSpec::Nn(_) => "nn",
        }
    }

    /// Explicit name if given, otherwise the family.
    pub fn label(&self) -> String {
        let name = match self {
            ModelSpec::Linear(s) => &s.name,
            ModelSpec::Knn(s) => &s.name,
            ModelSpec::Tree(s) => &s.name,
            ModelSpec::Forest(s) => &s.name,
            ModelSpec::Nn(s) => &s.name,
        };
        name.clone().unwrap_or_else(|| self.family().to_string())
    }

    /// Seed stored in the spec (zero for deterministic families).
    pub fn seed(&self) -> u64 {
        match self {
            ModelSpec::Forest(s) => s.seed,
            ModelSpec::Nn(s) => s.seed,
            _ => 0,
        }
    }

    /// Copy of the spec with its seed replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        match &mut s {
            ModelSpec::Forest(f) => f.seed = seed,
            ModelSpec::Nn(n) => n.seed = seed,
            _ => {}
        }
        s
    }

    pub fn validate(&self) -> Result<(), MlError> {
        match self {
            ModelSpec::Linear(s) if !(s.lambda >= 0.0 && s.lambda.is_finite()) => {
                Err(MlError::InvalidParameter("lambda must be nonnegative".into()))
            }
            ModelSpec::Knn(s) if s.k == 0 => Err(MlError::InvalidParameter("k must be at least 1".into())),
            ModelSpec::Tree(s) => s.validate(),
            ModelSpec::Forest(s) => s.validate(),
            ModelSpec::Nn(s) => s.validate(),
            _ => Ok(()),
        }
    }

    /// Fit using the seed stored in the spec.
    pub fn fit(&self, ds: &WindowedDataset) -> Result<TrainedModel, MlError> {
        let fitted = match self {
            ModelSpec::Linear(s) => Fitted::Linear(fit_linear(ds, s)?),
            ModelSpec::Knn(s) => Fitted::Knn(fit_knn(ds, s.k)?),
            ModelSpec::Tree(s) => Fitted::Tree(fit_tree(ds, s)?),
            ModelSpec::Forest(s) => Fitted::Forest(fit_forest(ds, s)?),
            ModelSpec::Nn(s) => Fitted::Nn(nn_train(ds, s)?),
        };
        Ok(TrainedModel { spec: self.clone(), fitted })
    }
}

impl Trainer for ModelSpec {
    fn label(&self) -> String {
        ModelSpec::label(self)
    }

    fn train(&self, ds: &WindowedDataset, seed: u64) -> Result<Box<dyn Forecaster>, MlError> {
        Ok(Box::new(self.with_seed(seed).fit(ds)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Fitted {
    Linear(LinearModel),
    Knn(KnnModel),
    Tree(TreeModel),
    Forest(ForestModel),
    Nn(NnModel),
}

/// A fitted model with the spec (hyperparameters and seed) it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub fitted: Fitted,
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String, MlError> {
        serde_json::to_string(self).map_err(|e| MlError::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, MlError> {
        serde_json::from_str(text).map_err(|e| MlError::Serialization(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), MlError> {
        std::fs::write(path, self.to_json()?).map_err(|e| MlError::Serialization(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, MlError> {
        let text = std::fs::read_to_string(path).map_err(|e| MlError::Serialization(e.to_string()))?;
        Self::from_json(&text)
    }
}

impl Forecaster for TrainedModel {
    fn predict(&self, x: &[f64]) -> Vec<f64> {
        match &self.fitted {
            Fitted::Linear(m) => predict_linear(m, x),
            Fitted::Knn(m) => predict_knn(m, x),
            Fitted::Tree(m) => predict_tree(m, x),
            Fitted::Forest(m) => predict_forest(m, x),
            Fitted::Nn(m) => m.predict(x),
        }
    }

    fn predict_distribution(&self, x: &[f64]) -> Option<ForecastDistribution> {
        match &self.fitted {
            Fitted::Nn(m) => m.predict_distribution(x),
            _ => None,
        }
    }

    fn predict_batch(&self, x: &Matrix) -> Vec<Vec<f64>> {
        match &self.fitted {
            Fitted::Knn(m) => predict_knn_batch(m, x),
            _ => (0..x.rows()).into_par_iter().map(|i| self.predict(x.row(i))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::make_windows;

    fn toy() -> WindowedDataset {
        let s: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).sin() + 0.05 * i as f64).collect();
        make_windows(&[s], 5, 3, 1).unwrap()
    }

    fn all_specs() -> Vec<ModelSpec> {
        let json = r#"[
            {"family": "linear"},
            {"family": "knn", "k": 3},
            {"family": "tree", "max_depth": 4, "min_leaf": 2},
            {"family": "forest", "n_trees": 5, "max_depth": 4, "min_leaf": 2, "feature_fraction": 0.6, "seed": 4},
            {"family": "nn", "hidden": [8], "epochs": 3, "seed": 2},
            {"family": "nn", "name": "prob", "hidden": [8], "head": "student_t", "epochs": 3, "seed": 2}
        ]"#;
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn spec_json_defaults_and_labels() {
        let specs = all_specs();
        let labels: Vec<String> = specs.iter().map(ModelSpec::label).collect();
        assert_eq!(labels, ["linear", "knn", "tree", "forest", "nn", "prob"]);
        match &specs[0] {
            ModelSpec::Linear(s) => assert_eq!(s.lambda, 1e-8),
            other => panic!("{other:?}"),
        }
        match &specs[4] {
            ModelSpec::Nn(s) => assert_eq!((s.batch_size, s.learning_rate, s.head), (32, 1e-3, Head::Mse)),
            other => panic!("{other:?}"),
        }
        let bad = r#"{"family": "knn", "k": 3, "kk": 1}"#;
        let err = serde_json::from_str::<ModelSpec>(bad).unwrap_err().to_string();
        assert!(err.contains("kk"), "{err}");
        assert!(serde_json::from_str::<ModelSpec>(r#"{"family": "svm"}"#).is_err());
    }

    #[test]
    fn save_load_round_trip_preserves_predictions() {
        let ds = toy();
        let dir = tempfile::tempdir().unwrap();
        for (i, spec) in all_specs().iter().enumerate() {
            let model = spec.fit(&ds).unwrap();
            let path = dir.path().join(format!("m{i}.json"));
            model.save(&path).unwrap();
            let loaded = TrainedModel::load(&path).unwrap();
            assert_eq!(loaded, model);
            for r in 0..ds.len() {
                assert_eq!(loaded.predict(ds.x.row(r)), model.predict(ds.x.row(r)));
            }
        }
    }

    #[test]
    fn fits_are_deterministic_and_batch_matches_single() {
        let ds = toy();
        for spec in all_specs() {
            let a = spec.fit(&ds).unwrap();
            let b = spec.fit(&ds).unwrap();
            assert_eq!(a, b);
            let batch = a.predict_batch(&ds.x);
            for (r, p) in batch.iter().enumerate() {
                assert_eq!(*p, a.predict(ds.x.row(r)));
            }
        }
    }

    #[test]
    fn trainer_seed_overrides_spec_seed() {
        let ds = toy();
        let spec = &all_specs()[3];
        let f = spec.train(&ds, 99).unwrap();
        let direct = spec.with_seed(99).fit(&ds).unwrap();
        assert_eq!(f.predict(ds.x.row(0)), direct.predict(ds.x.row(0)));
        assert_eq!(spec.with_seed(99).seed(), 99);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(ModelSpec::Knn(KnnSpec { name: None, k: 0 }).validate().is_err());
        assert!(ModelSpec::Nn(NnSpec { hidden: vec![0], ..Default::default() }).validate().is_err());
    }
}
