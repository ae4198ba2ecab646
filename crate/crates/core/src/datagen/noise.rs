//! Measurement-noise models.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::DatagenError;

/// How the `sigma` of additive Gaussian noise is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaScale {
    /// `sigma` is in the units of the series.
    #[default]
    Absolute,
    /// `sigma` is a fraction of the series' largest absolute pre-noise value.
    SeriesMax,
}

/// Noise applied to observable columns. An empty `targets` list means every column.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    #[default]
    None,
    AdditiveGaussian {
        sigma: f64,
        #[serde(default)]
        scale: SigmaScale,
        #[serde(default)]
        targets: Vec<String>,
    },
    MultiplicativeLognormal {
        sigma_log: f64,
        #[serde(default)]
        targets: Vec<String>,
    },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let sigma = match self {
            NoiseSpec::None => return Ok(()),
            NoiseSpec::AdditiveGaussian { sigma, .. } => *sigma,
            NoiseSpec::MultiplicativeLognormal { sigma_log, .. } => *sigma_log,
        };
        if sigma.is_finite() && sigma > 0.0 {
            Ok(())
        } else {
            Err(DatagenError::InvalidSpec(format!("noise sigma must be positive, got {sigma}")))
        }
    }

    pub fn targets(&self) -> &[String] {
        match self {
            NoiseSpec::None => &[],
            NoiseSpec::AdditiveGaussian { targets, .. } | NoiseSpec::MultiplicativeLognormal { targets, .. } => targets,
        }
    }

    /// Whether column `name` is corrupted by this spec.
    pub fn applies_to(&self, name: &str) -> bool {
        match self {
            NoiseSpec::None => false,
            _ => self.targets().is_empty() || self.targets().iter().any(|t| t == name),
        }
    }

    /// Corrupt one column.
    pub fn apply<R: Rng + ?Sized>(&self, series: &[f64], rng: &mut R) -> Result<Vec<f64>, DatagenError> {
        match *self {
            NoiseSpec::None => Ok(series.to_vec()),
            NoiseSpec::AdditiveGaussian { sigma, scale, .. } => {
                let sigma = match scale {
                    SigmaScale::Absolute => sigma,
                    SigmaScale::SeriesMax => sigma * series.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                };
                Ok(add_additive_gaussian(series, sigma, rng))
            }
            NoiseSpec::MultiplicativeLognormal { sigma_log, .. } => add_lognormal(series, sigma_log, rng),
        }
    }
}

/// `out[k] = in[k] + ε_k`, `ε_k ~ N(0, σ²)` iid.
pub fn add_additive_gaussian<R: Rng + ?Sized>(series: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    series
        .iter()
        .map(|&x| {
            let z: f64 = StandardNormal.sample(rng);
            x + sigma * z
        })
        .collect()
}

/// `out[k] = in[k] · exp(ε_k)`, `ε_k ~ N(0, σ_log²)` iid. Median-preserving;
/// inputs must be nonnegative.
pub fn add_lognormal<R: Rng + ?Sized>(series: &[f64], sigma_log: f64, rng: &mut R) -> Result<Vec<f64>, DatagenError> {
    if let Some((index, &value)) = series.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(DatagenError::NegativeInput { index, value });
    }
    Ok(series
        .iter()
        .map(|&x| {
            let z: f64 = StandardNormal.sample(rng);
            x * (sigma_log * z).exp()
        })
        .collect())
}
