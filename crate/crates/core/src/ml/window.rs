//! Sliding-window supervised datasets built from scalar series.

use serde::{Deserialize, Serialize};

use super::{Matrix, MlError};

/// Affine scaling `(v − mean) / std` shared by all input features.
///
/// All features are lags of the same quantity, so a single pair of scalars
/// is used and can be applied to targets as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: f64,
    pub std: f64,
}

impl Normalization {
    pub const IDENTITY: Normalization = Normalization { mean: 0.0, std: 1.0 };

    /// Mean and population standard deviation of all entries of `x`;
    /// identity scaling when the spread is zero.
    pub fn fit(x: &Matrix) -> Self {
        let values = x.as_slice();
        if values.is_empty() {
            return Self::IDENTITY;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if std > 0.0 && std.is_finite() {
            Self { mean, std }
        } else {
            Self::IDENTITY
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }

    pub fn apply_slice(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.apply(x)).collect()
    }

    pub fn apply_matrix(&self, m: &Matrix) -> Matrix {
        let data = m.as_slice().iter().map(|&x| self.apply(x)).collect();
        Matrix::new(m.rows(), m.cols(), data).expect("shape preserved")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    /// Inputs, `n × w_in`.
    pub x: Matrix,
    /// Targets, `n × w_out`.
    pub y: Matrix,
    /// Index of the source series of each window.
    pub series_index: Vec<usize>,
    pub normalization: Normalization,
}

impl WindowedDataset {
    pub fn new(x: Matrix, y: Matrix, series_index: Vec<usize>) -> Result<Self, MlError> {
        if x.rows() != y.rows() || x.rows() != series_index.len() {
            return Err(MlError::LengthMismatch { expected: x.rows(), got: y.rows() });
        }
        if x.rows() == 0 {
            return Err(MlError::EmptyDataset);
        }
        if x.as_slice().iter().chain(y.as_slice()).any(|v| !v.is_finite()) {
            return Err(MlError::NonFiniteData);
        }
        let normalization = Normalization::fit(&x);
        Ok(Self { x, y, series_index, normalization })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn w_in(&self) -> usize {
        self.x.cols()
    }

    pub fn w_out(&self) -> usize {
        self.y.cols()
    }

    /// Concatenate two datasets and refit the normalization.
    pub fn concat(&self, other: &WindowedDataset) -> Result<Self, MlError> {
        let mut idx = self.series_index.clone();
        idx.extend_from_slice(&other.series_index);
        Self::new(self.x.vstack(&other.x)?, self.y.vstack(&other.y)?, idx)
    }
}

/// Number of windows a series of length `m` yields.
pub fn window_count(m: usize, w_in: usize, w_out: usize, stride: usize) -> usize {
    if m < w_in + w_out {
        0
    } else {
        (m - w_in - w_out) / stride + 1
    }
}

/// Cut every series into `(w_in inputs, w_out targets)` pairs at offsets
/// `0, stride, 2·stride, …`.
pub fn make_windows<S: AsRef<[f64]>>(
    series_set: &[S],
    w_in: usize,
    w_out: usize,
    stride: usize,
) -> Result<WindowedDataset, MlError> {
    if w_in == 0 || w_out == 0 || stride == 0 {
        return Err(MlError::InvalidParameter(format!(
            "w_in, w_out and stride must be positive (got {w_in}, {w_out}, {stride})"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut owner = Vec::new();
    for (index, s) in series_set.iter().enumerate() {
        let s = s.as_ref();
        if s.len() < w_in + w_out {
            return Err(MlError::SeriesTooShort { index, len: s.len(), needed: w_in + w_out });
        }
        for w in 0..window_count(s.len(), w_in, w_out, stride) {
            let start = w * stride;
            xs.extend_from_slice(&s[start..start + w_in]);
            ys.extend_from_slice(&s[start + w_in..start + w_in + w_out]);
            owner.push(index);
        }
    }
    let n = owner.len();
    WindowedDataset::new(Matrix::new(n, w_in, xs)?, Matrix::new(n, w_out, ys)?, owner)
}
