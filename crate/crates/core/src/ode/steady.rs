use super::dopri::{Attempt, Stepper};
use super::{OdeError, OdeSystem, SolverConfig};

/// Result of a steady-state search.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub state: Vec<f64>,
    /// Time at which the search stopped.
    pub t: f64,
    /// `true` when `‖f(t, y)‖∞ < tol`; `false` when `t_max` was reached first.
    pub converged: bool,
}

/// Integrate from `t = 0` until `‖f(t, y)‖∞ < tol` or `t_max` is reached.
///
/// Uses the adaptive Dormand–Prince stepper with `cfg`; the residual is
/// checked after every accepted step.
pub fn find_steady_state(
    system: &dyn OdeSystem,
    params: &[f64],
    y0: &[f64],
    tol: f64,
    t_max: f64,
    cfg: &SolverConfig,
) -> Result<SteadyState, OdeError> {
    if !(tol > 0.0) {
        return Err(OdeError::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(OdeError::InvalidConfig(format!("t_max must be finite and positive, got {t_max}")));
    }
    let bounds = cfg.bounds(t_max)?;
    let mut stepper = Stepper::new(system, params, 0.0, y0)?;
    let residual = |s: &Stepper| s.f.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut h = bounds.h_init;
    let mut steps = 0usize;
    while residual(&stepper) >= tol {
        if stepper.t >= t_max {
            return Ok(SteadyState { state: stepper.y, t: stepper.t, converged: false });
        }
        if steps >= cfg.max_steps {
            return Err(OdeError::StepLimitExceeded { t: stepper.t, max_steps: cfg.max_steps });
        }
        steps += 1;
        let remaining = t_max - stepper.t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        match stepper.attempt(h, cfg.rtol, cfg.atol) {
            Attempt::Finished(err) if err <= 1.0 => {
                let t_new = if last { t_max } else { stepper.t + h };
                stepper.accept(h, t_new);
                let fac = (0.9 * err.max(1e-4).powf(-0.2)).clamp(0.2, 10.0);
                h = (h * fac).min(bounds.h_max);
            }
            Attempt::Finished(err) => {
                h *= (0.9 * err.powf(-0.2)).max(0.2);
                if h < bounds.h_min {
                    return Err(OdeError::StepUnderflow { t: stepper.t, h });
                }
            }
            Attempt::NonFinite => {
                h *= 0.2;
                if h < bounds.h_min {
                    return Err(OdeError::NonFiniteRhs { t: stepper.t });
                }
            }
        }
    }
    Ok(SteadyState { state: stepper.y, t: stepper.t, converged: true })
}

#[cfg(test)]
mod tests {
    use super::super::test_systems::{Constant, Exponential};
    use super::*;

    #[test]
    fn decay_converges_to_origin() {
        let sys = Exponential { rate: -1.0 };
        let ss = find_steady_state(&sys, &[], &[1.0], 1e-8, 1e3, &SolverConfig::default()).unwrap();
        assert!(ss.converged);
        assert!(ss.state[0].abs() < 1e-8);
    }

    #[test]
    fn constant_drift_times_out() {
        let sys = Constant(1.0);
        let ss = find_steady_state(&sys, &[], &[0.0], 1e-6, 50.0, &SolverConfig::default()).unwrap();
        assert!(!ss.converged);
        assert_eq!(ss.t, 50.0);
        assert!((ss.state[0] - 50.0).abs() < 1e-9);
    }

    #[test]
    fn already_steady_returns_immediately() {
        let sys = Constant(0.0);
        let ss = find_steady_state(&sys, &[], &[3.0], 1e-6, 10.0, &SolverConfig::default()).unwrap();
        assert!(ss.converged);
        assert_eq!(ss.t, 0.0);
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let sys = Constant(0.0);
        assert!(find_steady_state(&sys, &[], &[3.0], 0.0, 10.0, &SolverConfig::default()).is_err());
    }
}
