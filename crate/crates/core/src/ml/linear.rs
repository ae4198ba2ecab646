use serde::{Deserialize, Serialize};

use super::{Matrix, MlError, WindowedDataset};
use crate::linalg::solve_in_place;

const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    #[serde(default)]
    pub name: Option<String>,
    /// Ridge penalty on the coefficients (not the intercept).
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    1e-8
}

impl Default for LinearSpec {
    fn default() -> Self {
        Self { name: None, lambda: default_lambda() }
    }
}

/// `y = Wᵀx + b`, one column of `W` per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// `w_in × w_out`.
    pub coefficients: Matrix,
    pub intercept: Vec<f64>,
}

/// Ridge least squares with intercept via centered normal equations.
pub fn fit_linear(ds: &WindowedDataset, spec: &LinearSpec) -> Result<LinearModel, MlError> {
    if !(spec.lambda >= 0.0 && spec.lambda.is_finite()) {
        return Err(MlError::InvalidParameter(format!("lambda must be nonnegative, got {}", spec.lambda)));
    }
    let (n, p, q) = (ds.len(), ds.w_in(), ds.w_out());
    let mut x_mean = vec![0.0; p];
    let mut y_mean = vec![0.0; q];
    for i in 0..n {
        x_mean.iter_mut().zip(ds.x.row(i)).for_each(|(m, v)| *m += v);
        y_mean.iter_mut().zip(ds.y.row(i)).for_each(|(m, v)| *m += v);
    }
    x_mean.iter_mut().for_each(|m| *m /= n as f64);
    y_mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut a = vec![0.0; p * p];
    let mut b = vec![0.0; p * q];
    let mut xc = vec![0.0; p];
    let mut yc = vec![0.0; q];
    for i in 0..n {
        xc.iter_mut().zip(ds.x.row(i)).zip(&x_mean).for_each(|((c, v), m)| *c = v - m);
        yc.iter_mut().zip(ds.y.row(i)).zip(&y_mean).for_each(|((c, v), m)| *c = v - m);
        for r in 0..p {
            for c in 0..p {
                a[r * p + c] += xc[r] * xc[c];
            }
            for c in 0..q {
                b[r * q + c] += xc[r] * yc[c];
            }
        }
    }
    for r in 0..p {
        a[r * p + r] += spec.lambda;
    }
    if !solve_in_place(&mut a, &mut b, p, q, PIVOT_TOL) {
        return Err(MlError::DegenerateDesign);
    }
    let intercept = (0..q)
        .map(|c| y_mean[c] - (0..p).map(|r| b[r * q + c] * x_mean[r]).sum::<f64>())
        .collect();
    Ok(LinearModel { coefficients: Matrix::new(p, q, b)?, intercept })
}

pub fn predict_linear(model: &LinearModel, x: &[f64]) -> Vec<f64> {
    let w = &model.coefficients;
    (0..w.cols())
        .map(|c| model.intercept[c] + x.iter().enumerate().map(|(r, v)| w.get(r, c) * v).sum::<f64>())
        .collect()
}
