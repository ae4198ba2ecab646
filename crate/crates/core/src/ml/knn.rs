use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Matrix, MlError, Normalization, WindowedDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub normalization: Normalization,
    /// Normalized training inputs.
    pub x: Matrix,
    pub y: Matrix,
}

pub fn fit_knn(ds: &WindowedDataset, k: usize) -> Result<KnnModel, MlError> {
    if k == 0 {
        return Err(MlError::InvalidParameter("k must be at least 1".into()));
    }
    if k > ds.len() {
        return Err(MlError::KTooLarge { k, n: ds.len() });
    }
    Ok(KnnModel { k, normalization: ds.normalization, x: ds.normalization.apply_matrix(&ds.x), y: ds.y.clone() })
}

impl KnnModel {
    /// Training indices of the `k` nearest neighbours, nearest first; equal
    /// distances are ordered by index.
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let q = self.normalization.apply_slice(x);
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, row)| (row.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, order);
            d.truncate(self.k);
        }
        d.sort_unstable_by(order);
        d.into_iter().map(|(_, i)| i).collect()
    }
}

pub fn predict_knn(model: &KnnModel, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; model.y.cols()];
    for i in model.neighbours(x) {
        out.iter_mut().zip(model.y.row(i)).for_each(|(o, v)| *o += v);
    }
    out.iter_mut().for_each(|o| *o /= model.k as f64);
    out
}

pub(crate) fn predict_knn_batch(model: &KnnModel, x: &Matrix) -> Vec<Vec<f64>> {
    (0..x.rows()).into_par_iter().map(|i| predict_knn(model, x.row(i))).collect()
}
