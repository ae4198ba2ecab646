use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::DatagenError;

/// Sampling distribution for a kinetic parameter or an initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Constant { value: f64 },
    /// Continuous uniform on the open interval `(low, high)`.
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std: f64 },
    /// `exp(N(mu_log, sigma_log²))`.
    Lognormal { mu_log: f64, sigma_log: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let invalid = |msg: String| Err(DatagenError::InvalidSpec(msg));
        match *self {
            DistributionSpec::Constant { value } if !value.is_finite() => {
                invalid(format!("constant must be finite, got {value}"))
            }
            DistributionSpec::Uniform { low, high } if !(low.is_finite() && high.is_finite() && low < high) => {
                invalid(format!("uniform needs finite low < high, got ({low}, {high})"))
            }
            DistributionSpec::Normal { mean, std } if !(mean.is_finite() && std.is_finite() && std > 0.0) => {
                invalid(format!("normal needs finite mean and std > 0, got ({mean}, {std})"))
            }
            DistributionSpec::Lognormal { mu_log, sigma_log }
                if !(mu_log.is_finite() && sigma_log.is_finite() && sigma_log > 0.0) =>
            {
                invalid(format!("lognormal needs finite mu_log and sigma_log > 0, got ({mu_log}, {sigma_log})"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, DatagenError> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Constant { value } => value,
            DistributionSpec::Uniform { low, high } => loop {
                let v = rng.random_range(low..high);
                if v > low {
                    break v;
                }
            },
            DistributionSpec::Normal { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std * z
            }
            DistributionSpec::Lognormal { mu_log, sigma_log } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu_log + sigma_log * z).exp()
            }
        })
    }
}

/// Draw one value from `dist`.
pub fn sample<R: Rng + ?Sized>(dist: &DistributionSpec, rng: &mut R) -> Result<f64, DatagenError> {
    dist.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::rng_from_seed;

    #[test]
    fn constant_is_constant() {
        let mut rng = rng_from_seed(1);
        let d = DistributionSpec::Constant { value: 0.125 };
        assert!((0..100).all(|_| sample(&d, &mut rng).unwrap() == 0.125));
    }

    #[test]
    fn uniform_support_and_mean() {
        let mut rng = rng_from_seed(2);
        let d = DistributionSpec::Uniform { low: 0.32, high: 0.35 };
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample(&d, &mut rng).unwrap()).collect();
        assert!(draws.iter().all(|&v| v > 0.32 && v < 0.35));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let bound = 3.0 * 0.03 / (12.0 * n as f64).sqrt();
        assert!((mean - 0.335).abs() < bound, "mean {mean}");
    }

    #[test]
    fn lognormal_is_positive() {
        let mut rng = rng_from_seed(3);
        let d = DistributionSpec::Lognormal { mu_log: 0.0, sigma_log: 2.0 };
        assert!((0..10_000).all(|_| sample(&d, &mut rng).unwrap() > 0.0));
    }

    #[test]
    fn normal_moments() {
        let mut rng = rng_from_seed(4);
        let d = DistributionSpec::Normal { mean: 3.0, std: 0.5 };
        let n = 50_000;
        let draws: Vec<f64> = (0..n).map(|_| sample(&d, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 3.0).abs() < 3.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut rng = rng_from_seed(5);
        for d in [
            DistributionSpec::Uniform { low: 1.0, high: 1.0 },
            DistributionSpec::Normal { mean: 0.0, std: 0.0 },
            DistributionSpec::Lognormal { mu_log: 0.0, sigma_log: -1.0 },
            DistributionSpec::Constant { value: f64::NAN },
        ] {
            assert!(matches!(sample(&d, &mut rng), Err(DatagenError::InvalidSpec(_))));
        }
    }

    #[test]
    fn json_shape() {
        let d: DistributionSpec = serde_json::from_str(r#"{"kind":"uniform","low":0.32,"high":0.35}"#).unwrap();
        assert_eq!(d, DistributionSpec::Uniform { low: 0.32, high: 0.35 });
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"kind":"uniform","low":0,"high":1,"x":2}"#).is_err());
    }
}
