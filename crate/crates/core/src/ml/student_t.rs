//! Location-scale Student's t distribution: density, quantiles, intervals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::{beta_reg, digamma, ln_gamma};
use super::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentT {
    pub mu: f64,
    pub sigma: f64,
    pub nu: f64,
}

impl StudentT {
    pub fn new(mu: f64, sigma: f64, nu: f64) -> Result<Self, MlError> {
        if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0 && nu > 0.0 && !nu.is_nan()) {
            return Err(MlError::InvalidParams(format!("mu = {mu}, sigma = {sigma}, nu = {nu}")));
        }
        Ok(Self { mu, sigma, nu })
    }

    /// Negative log density at `y`.
    pub fn nll(&self, y: f64) -> f64 {
        nll_and_gradient(self.mu, self.sigma, self.nu, y).0
    }

    /// Central interval with probability `level`.
    pub fn interval(&self, level: f64) -> Result<(f64, f64), MlError> {
        if !(level > 0.0 && level < 1.0) {
            return Err(MlError::InvalidLevel(level));
        }
        let q = t_quantile(self.nu, 0.5 * (1.0 + level))?;
        Ok((self.mu - self.sigma * q, self.mu + self.sigma * q))
    }
}

/// One Student's t per forecast horizon step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastDistribution {
    pub steps: Vec<StudentT>,
}

impl ForecastDistribution {
    pub fn means(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.mu).collect()
    }
}

/// NLL and its partial derivatives with respect to `(mu, sigma, nu)`.
pub(crate) fn nll_and_gradient(mu: f64, sigma: f64, nu: f64, y: f64) -> (f64, [f64; 3]) {
    let z = (y - mu) / sigma;
    let q = z * z / nu;
    let half = 0.5 * (nu + 1.0);
    let log1pq = q.ln_1p();
    let nll = -ln_gamma(half) + ln_gamma(0.5 * nu) + 0.5 * (nu * PI).ln() + sigma.ln() + half * log1pq;
    let w = (nu + 1.0) / (nu * (1.0 + q));
    let d_mu = -w * z / sigma;
    let d_sigma = (1.0 - w * z * z) / sigma;
    let d_nu = 0.5 * (digamma(0.5 * nu) - digamma(half)) + 0.5 / nu + 0.5 * log1pq - half * q / (nu * (1.0 + q));
    (nll, [d_mu, d_sigma, d_nu])
}

/// Negative log likelihood of `y` summed over horizon steps.
pub fn student_t_nll(dist: &ForecastDistribution, y: &[f64]) -> Result<f64, MlError> {
    if dist.steps.len() != y.len() {
        return Err(MlError::LengthMismatch { expected: dist.steps.len(), got: y.len() });
    }
    let mut total = 0.0;
    for (s, &v) in dist.steps.iter().zip(y) {
        if !(s.sigma > 0.0 && s.nu > 0.0) {
            return Err(MlError::InvalidParams(format!("sigma = {}, nu = {}", s.sigma, s.nu)));
        }
        total += s.nll(v);
    }
    Ok(total)
}

/// CDF of the standard t distribution with `nu` degrees of freedom.
pub fn t_cdf(nu: f64, t: f64) -> f64 {
    let t2 = t * t;
    let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + t2), t2 / (nu + t2));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Inverse CDF by bisection to an absolute tolerance of 1e-10.
pub fn t_quantile(nu: f64, p: f64) -> Result<f64, MlError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MlError::InvalidLevel(p));
    }
    if !(nu > 0.0) {
        return Err(MlError::InvalidParams(format!("nu = {nu}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p < 0.5 {
        return Ok(-t_quantile(nu, 1.0 - p)?);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_cdf(nu, hi) < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(f64::INFINITY);
        }
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if t_cdf(nu, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-step central intervals `μ ± σ·t_quantile(ν, (1+level)/2)`.
pub fn interval(dist: &ForecastDistribution, level: f64) -> Result<Vec<(f64, f64)>, MlError> {
    dist.steps.iter().map(|s| s.interval(level)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    fn single(mu: f64, sigma: f64, nu: f64) -> ForecastDistribution {
        ForecastDistribution { steps: vec![StudentT::new(mu, sigma, nu).unwrap()] }
    }

    #[test]
    fn cauchy_mode() {
        let nll = student_t_nll(&single(0.0, 1.0, 1.0), &[0.0]).unwrap();
        assert!((nll - PI.ln()).abs() < 1e-9);
    }

    #[test]
    fn large_nu_approaches_gaussian() {
        for &(mu, sigma, y) in &[(0.0, 1.0, 0.5), (2.0, 0.3, 1.1), (-1.0, 4.0, 7.0)] {
            let t = student_t_nll(&single(mu, sigma, 1e6), &[y]).unwrap();
            let g = 0.5 * (2.0 * PI * sigma * sigma).ln() + (y - mu).powi(2) / (2.0 * sigma * sigma);
            assert!((t - g).abs() < 1e-3, "{t} vs {g}");
        }
    }

    #[test]
    fn nll_is_summed_and_checked() {
        let d = ForecastDistribution {
            steps: vec![StudentT::new(0.0, 1.0, 3.0).unwrap(), StudentT::new(1.0, 2.0, 5.0).unwrap()],
        };
        let total = student_t_nll(&d, &[0.3, -0.2]).unwrap();
        assert!((total - d.steps[0].nll(0.3) - d.steps[1].nll(-0.2)).abs() < 1e-14);
        assert!(student_t_nll(&d, &[0.0]).is_err());
        assert!(StudentT::new(0.0, 0.0, 3.0).is_err());
        assert!(StudentT::new(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        for nu in [0.5, 1.0, 3.0, 100.0] {
            assert_eq!(t_quantile(nu, 0.5).unwrap(), 0.0);
        }
        assert!((t_quantile(1.0, 0.75).unwrap() - 1.0).abs() < 1e-8);
        assert!(matches!(t_quantile(1.0, 1.0), Err(MlError::InvalidLevel(_))));
        assert!(matches!(single(0.0, 1.0, 3.0).steps[0].interval(0.0), Err(MlError::InvalidLevel(_))));
    }

    #[test]
    fn quantile_matches_reference_library() {
        for &nu in &[1.0, 2.5, 7.0, 30.0, 1e4] {
            let r = StudentsT::new(0.0, 1.0, nu).unwrap();
            for &p in &[0.01, 0.25, 0.6, 0.925, 0.999] {
                let expected = r.inverse_cdf(p);
                let got = t_quantile(nu, p).unwrap();
                assert!((got - expected).abs() < 1e-7 * expected.abs().max(1.0), "nu={nu} p={p}: {got} vs {expected}");
                assert!((t_cdf(nu, got) - p).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-6;
        for &(mu, sigma, nu, y) in &[(0.2, 1.3, 4.0, 1.7), (-1.0, 0.4, 2.5, -0.9), (3.0, 2.0, 40.0, -2.0)] {
            let (_, g) = nll_and_gradient(mu, sigma, nu, y);
            let f = |m: f64, s: f64, n: f64| nll_and_gradient(m, s, n, y).0;
            let fd = [
                (f(mu + h, sigma, nu) - f(mu - h, sigma, nu)) / (2.0 * h),
                (f(mu, sigma + h, nu) - f(mu, sigma - h, nu)) / (2.0 * h),
                (f(mu, sigma, nu + h) - f(mu, sigma, nu - h)) / (2.0 * h),
            ];
            for (a, b) in g.iter().zip(fd) {
                assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-2), "{a} vs {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn mode_minimizes_nll(mu in -5.0f64..5.0, sigma in 0.1f64..5.0, nu in 0.5f64..50.0, dy in -10.0f64..10.0) {
            let d = StudentT::new(mu, sigma, nu).unwrap();
            prop_assert!(d.nll(mu) <= d.nll(mu + dy));
        }

        #[test]
        fn intervals_widen_with_level_and_sigma(
            sigma in 0.1f64..5.0, nu in 2.01f64..50.0, l1 in 0.05f64..0.9, dl in 0.01f64..0.09, ds in 0.01f64..2.0,
        ) {
            let width = |s: f64, l: f64| {
                let (lo, hi) = StudentT::new(0.0, s, nu).unwrap().interval(l).unwrap();
                hi - lo
            };
            prop_assert!(width(sigma, l1 + dl) > width(sigma, l1));
            prop_assert!(width(sigma + ds, l1) > width(sigma, l1));
            let (lo50, hi50) = StudentT::new(1.0, sigma, nu).unwrap().interval(0.5).unwrap();
            let (lo85, hi85) = StudentT::new(1.0, sigma, nu).unwrap().interval(0.85).unwrap();
            prop_assert!(lo85 <= lo50 && lo50 <= hi50 && hi50 <= hi85);
        }
    }
}
