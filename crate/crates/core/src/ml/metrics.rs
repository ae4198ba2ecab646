use serde::{Deserialize, Serialize};

use super::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    /// `rmse / (max − min)` of the true values, or `rmse` when the range is zero.
    pub nrmse: f64,
    /// Mean negative log likelihood per window, for probabilistic models.
    pub mean_nll: Option<f64>,
}

pub fn metric_nrmse(y_true: &[f64], y_pred: &[f64]) -> Result<Metrics, MlError> {
    if y_true.len() != y_pred.len() {
        return Err(MlError::LengthMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let mse = y_true.iter().zip(y_pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y_true.len() as f64;
    let rmse = mse.sqrt();
    let max = y_true.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = y_true.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    let nrmse = if range > 0.0 { rmse / range } else { rmse };
    Ok(Metrics { rmse, nrmse, mean_nll: None })
}
