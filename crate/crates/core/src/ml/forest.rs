use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{build, FeatureSampler};
use super::{predict_tree, MlError, TreeModel, TreeSpec, WindowedDataset};
use crate::datagen::{rng_from_seed, seed_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Fraction of input features searched at each split.
    #[serde(default = "one")]
    pub feature_fraction: f64,
    #[serde(default = "yes")]
    pub bootstrap: bool,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl ForestSpec {
    pub fn validate(&self) -> Result<(), MlError> {
        if self.n_trees == 0 {
            return Err(MlError::InvalidParameter("n_trees must be at least 1".into()));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(MlError::InvalidParameter(format!(
                "feature_fraction must be in (0, 1], got {}",
                self.feature_fraction
            )));
        }
        self.tree_spec().validate()
    }

    fn tree_spec(&self) -> TreeSpec {
        TreeSpec { name: None, max_depth: self.max_depth, min_leaf: self.min_leaf }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
}

/// Trees are grown in parallel; tree `i` draws from its own child seed of
/// `spec.seed`, so the result does not depend on scheduling.
pub fn fit_forest(ds: &WindowedDataset, spec: &ForestSpec) -> Result<ForestModel, MlError> {
    spec.validate()?;
    let tree_spec = spec.tree_spec();
    let n = ds.len();
    let n_features = ((spec.feature_fraction * ds.w_in() as f64).ceil() as usize).clamp(1, ds.w_in());
    let trees = (0..spec.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(seed_for(spec.seed, i as u64));
            let rows: Vec<usize> =
                if spec.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
            build(&ds.x, &ds.y, rows, &tree_spec, Some(FeatureSampler { count: n_features, rng: &mut rng }))
        })
        .collect();
    Ok(ForestModel { trees })
}

pub fn predict_forest(model: &ForestModel, x: &[f64]) -> Vec<f64> {
    let mut out = predict_tree(&model.trees[0], x);
    for t in &model.trees[1..] {
        out.iter_mut().zip(predict_tree(t, x)).for_each(|(o, v)| *o += v);
    }
    out.iter_mut().for_each(|o| *o /= model.trees.len() as f64);
    out
}
