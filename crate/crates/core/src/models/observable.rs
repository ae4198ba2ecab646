//! Scalar readouts computed from trajectories.

use serde::{Deserialize, Serialize};

use super::{finite_difference, ModelError};
use crate::ode::{OdeSystem, Trajectory};

/// A state component addressed by position or by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Index(usize),
    Name(String),
}

impl StateRef {
    fn resolve(&self, names: &[String]) -> Result<usize, ModelError> {
        match self {
            StateRef::Index(i) if *i < names.len() => Ok(*i),
            StateRef::Index(i) => Err(ModelError::IndexOutOfRange { index: *i, dimension: names.len() }),
            StateRef::Name(n) => names
                .iter()
                .position(|s| s == n)
                .ok_or_else(|| ModelError::UnknownState(n.clone())),
        }
    }
}

impl From<&str> for StateRef {
    fn from(s: &str) -> Self {
        StateRef::Name(s.to_string())
    }
}

impl From<usize> for StateRef {
    fn from(i: usize) -> Self {
        StateRef::Index(i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Denominator {
    Constant { value: f64 },
    /// Sum of the listed states at the first trajectory point.
    InitialSum { states: Vec<StateRef> },
    /// A system parameter, e.g. the total population `N`.
    Parameter { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transform {
    /// One state column.
    State { state: StateRef },
    /// Sum of several state columns.
    Sum { states: Vec<StateRef> },
    /// Sum of state columns divided by a constant.
    Ratio { numerator: Vec<StateRef>, denominator: Denominator },
    /// First differences of a state column, aligned to the later time point.
    Difference { state: StateRef },
}

/// A named transform from a trajectory to a scalar series.
///
/// Negative outputs (solver round-off in nonnegative quantities) are clamped
/// to zero unless `clamp_negative` is disabled. Solver state is never clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedObservable {
    pub name: String,
    pub transform: Transform,
    #[serde(default = "default_clamp")]
    pub clamp_negative: bool,
}

fn default_clamp() -> bool {
    true
}

impl DerivedObservable {
    pub fn new(name: impl Into<String>, transform: Transform) -> Self {
        Self { name: name.into(), transform, clamp_negative: true }
    }

    /// Identity readout of one state, named after it.
    pub fn state(name: &str) -> Self {
        Self::new(name, Transform::State { state: name.into() })
    }

    /// Check that every referenced state and parameter exists in `system`.
    pub fn validate(&self, system: &dyn OdeSystem) -> Result<(), ModelError> {
        let names = system.state_names();
        let params = system.parameter_names();
        match &self.transform {
            Transform::State { state } | Transform::Difference { state } => {
                state.resolve(&names)?;
            }
            Transform::Sum { states } => {
                for s in states {
                    s.resolve(&names)?;
                }
            }
            Transform::Ratio { numerator, denominator } => {
                for s in numerator {
                    s.resolve(&names)?;
                }
                match denominator {
                    Denominator::Constant { .. } => {}
                    Denominator::InitialSum { states } => {
                        for s in states {
                            s.resolve(&names)?;
                        }
                    }
                    Denominator::Parameter { name } => {
                        if !params.contains(name) {
                            return Err(ModelError::UnknownParameter(name.clone()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Observable values together with the time points they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Evaluate `obs` on a trajectory of `system` integrated with `params`.
pub fn evaluate_observable(
    obs: &DerivedObservable,
    traj: &Trajectory,
    system: &dyn OdeSystem,
    params: &[f64],
) -> Result<ObservableSeries, ModelError> {
    let names = system.state_names();
    let sum_columns = |refs: &[StateRef]| -> Result<Vec<f64>, ModelError> {
        let idx = refs.iter().map(|r| r.resolve(&names)).collect::<Result<Vec<_>, _>>()?;
        Ok(traj.states.iter().map(|row| idx.iter().map(|&i| row[i]).sum()).collect())
    };
    let times = traj.times().to_vec();

    let (times, mut values) = match &obs.transform {
        Transform::State { state } => (times, traj.column(state.resolve(&names)?)),
        Transform::Sum { states } => (times, sum_columns(states)?),
        Transform::Ratio { numerator, denominator } => {
            let c = match denominator {
                Denominator::Constant { value } => *value,
                Denominator::InitialSum { states } => {
                    let first = traj.states.first().ok_or(ModelError::SeriesTooShort { len: 0, min: 1 })?;
                    let mut total = 0.0;
                    for s in states {
                        total += first[s.resolve(&names)?];
                    }
                    total
                }
                Denominator::Parameter { name } => {
                    let pos = system
                        .parameter_names()
                        .iter()
                        .position(|p| p == name)
                        .ok_or_else(|| ModelError::UnknownParameter(name.clone()))?;
                    params[pos]
                }
            };
            if c == 0.0 || !c.is_finite() {
                return Err(ModelError::InvalidDenominator(obs.name.clone()));
            }
            (times, sum_columns(numerator)?.into_iter().map(|v| v / c).collect())
        }
        Transform::Difference { state } => {
            let column = traj.column(state.resolve(&names)?);
            (times[1.min(times.len())..].to_vec(), finite_difference(&column)?)
        }
    };
    if obs.clamp_negative {
        for v in values.iter_mut().filter(|v| **v < 0.0) {
            *v = 0.0;
        }
    }
    Ok(ObservableSeries { times, values })
}
