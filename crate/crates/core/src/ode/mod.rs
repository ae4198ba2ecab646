//! ODE integration on fixed output grids.
//!
//! - [`integrate`]: Dormand–Prince 5(4) with PI step-size control; states are
//!   reported exactly at the requested grid times through the 4th-order
//!   continuous extension.
//! - [`integrate_fixed`]: the same tableau with a forced constant step, used for
//!   convergence studies and stability comparisons.
//! - [`integrate_implicit`]: fixed-step implicit trapezoidal rule with a damped
//!   Newton iteration. Use it when [`integrate`] reports [`OdeError::StepUnderflow`].
//! - [`find_steady_state`]: integrate until the right-hand side vanishes.
//!
//! Systems implement [`OdeSystem`]. Parameters are passed as a flat slice in
//! the order given by [`OdeSystem::parameter_names`].

mod dopri;
mod implicit;
mod steady;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dopri::{integrate, integrate_fixed};
pub use implicit::integrate_implicit;
pub use steady::{find_steady_state, SteadyState};

/// Right-hand side of an autonomous or non-autonomous system `dy/dt = f(t, y; θ)`.
pub trait OdeSystem: Send + Sync {
    /// Number of state variables.
    fn dimension(&self) -> usize;

    /// One name per state component, in state-vector order.
    fn state_names(&self) -> Vec<String>;

    /// One name per parameter, in parameter-slice order.
    fn parameter_names(&self) -> Vec<String>;

    /// Evaluate `f(t, y; params)` into `dydt`.
    fn rhs(&self, t: f64, y: &[f64], params: &[f64], dydt: &mut [f64]);

    /// Analytic Jacobian `∂f/∂y`, row-major `d × d`.
    ///
    /// Returns `false` when the system does not provide one; the implicit
    /// solver then falls back to central finite differences.
    fn jacobian(&self, _t: f64, _y: &[f64], _params: &[f64], _jac: &mut [f64]) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: system has {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("initial state contains non-finite values")]
    NonFiniteState,
    #[error("step limit of {max_steps} exceeded at t = {t}")]
    StepLimitExceeded { t: f64, max_steps: usize },
    #[error("step size {h:e} fell below h_min at t = {t} (problem is likely stiff)")]
    StepUnderflow { t: f64, h: f64 },
    #[error("right-hand side returned non-finite values at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("Newton iteration failed to converge after {iterations} iterations at t = {t}")]
    NewtonDivergence { t: f64, iterations: usize },
}

/// Output times of an integration. `t0` is the time of the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t0: f64, points: Vec<f64>) -> Result<Self, OdeError> {
        if points.is_empty() {
            return Err(OdeError::InvalidGrid("grid must contain at least one point".into()));
        }
        if !t0.is_finite() || points.iter().any(|p| !p.is_finite()) {
            return Err(OdeError::InvalidGrid("grid times must be finite".into()));
        }
        if points[0] < t0 {
            return Err(OdeError::InvalidGrid(format!(
                "first grid point {} precedes t0 = {t0}",
                points[0]
            )));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(OdeError::InvalidGrid(format!(
                "grid points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { t0, points })
    }

    /// `count` points `start + i·step`, with `t0 = start`.
    pub fn uniform(start: f64, step: f64, count: usize) -> Result<Self, OdeError> {
        if !(step > 0.0) {
            return Err(OdeError::InvalidGrid("step must be positive".into()));
        }
        let points = (0..count).map(|i| start + i as f64 * step).collect();
        Self::new(start, points)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `t0` to the last grid point.
    pub fn span(&self) -> f64 {
        self.points[self.points.len() - 1] - self.t0
    }
}

/// Step-size and tolerance settings shared by all integrators.
///
/// `h_init` defaults to `1e-3 · span` and `h_max` to the span of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-9,
            h_init: None,
            h_min: 1e-12,
            h_max: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepBounds {
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(OdeError::InvalidConfig(format!("{name} must be finite and positive, got {v}")))
            }
        };
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("h_min", self.h_min)?;
        if let Some(h) = self.h_init {
            positive("h_init", h)?;
        }
        if let Some(h) = self.h_max {
            positive("h_max", h)?;
        }
        if self.rtol < 1e-14 {
            return Err(OdeError::InvalidConfig(format!("rtol must be >= 1e-14, got {}", self.rtol)));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }

    /// Resolve the optional step settings against an integration span.
    pub(crate) fn bounds(&self, span: f64) -> Result<StepBounds, OdeError> {
        self.validate()?;
        let h_max = self.h_max.unwrap_or(span);
        let h_init = self.h_init.unwrap_or(1e-3 * span).min(h_max);
        if !(self.h_min <= h_init && h_init <= h_max) {
            return Err(OdeError::InvalidConfig(format!(
                "need h_min <= h_init <= h_max, got {} / {h_init} / {h_max}",
                self.h_min
            )));
        }
        Ok(StepBounds { h_init, h_min: self.h_min, h_max })
    }
}

/// States at each grid point, one row per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn dimension(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|row| row[index]).collect()
    }
}

pub(crate) fn check_inputs(
    system: &dyn OdeSystem,
    params: &[f64],
    y0: &[f64],
) -> Result<(), OdeError> {
    let d = system.dimension();
    if y0.len() != d {
        return Err(OdeError::DimensionMismatch { what: "states", expected: d, got: y0.len() });
    }
    let p = system.parameter_names().len();
    if params.len() != p {
        return Err(OdeError::DimensionMismatch { what: "parameters", expected: p, got: params.len() });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::NonFiniteState);
    }
    Ok(())
}

pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
