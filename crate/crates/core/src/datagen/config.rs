use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{kept_count, DatagenError, DistributionSpec, NoiseSpec, SparsifierSpec};
use crate::models::{DerivedObservable, ModelRegistry, Transform};
use crate::ode::{OdeSystem, SolverConfig, TimeGrid};

/// Output time grid of every simulated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `count` points `start + i·step`; the initial state sits at `start`.
    Uniform { start: f64, step: f64, count: usize },
    Explicit { t0: f64, points: Vec<f64> },
}

impl GridSpec {
    pub fn to_grid(&self) -> Result<TimeGrid, DatagenError> {
        Ok(match self {
            GridSpec::Uniform { start, step, count } => TimeGrid::uniform(*start, *step, *count)?,
            GridSpec::Explicit { t0, points } => TimeGrid::new(*t0, points.clone())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Adaptive Dormand–Prince 5(4).
    #[default]
    Explicit,
    /// Fixed-step implicit trapezoidal rule, for stiff systems.
    Implicit,
}

/// Declarative recipe for a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    /// Registry id of the ODE system.
    pub system: String,
    /// One distribution per system parameter.
    pub parameters: BTreeMap<String, DistributionSpec>,
    /// One distribution per state component.
    pub initial_conditions: BTreeMap<String, DistributionSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub method: SolverMethod,
    /// Columns of each series. Empty means one identity column per state.
    #[serde(default)]
    pub observables: Vec<DerivedObservable>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub sparsifier: Option<SparsifierSpec>,
    pub n_series: usize,
    pub master_seed: u64,
}

impl GenerationConfig {
    pub fn from_json(text: &str) -> Result<Self, DatagenError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Observables with the empty-list default expanded.
    pub fn resolved_observables(&self, system: &dyn OdeSystem) -> Vec<DerivedObservable> {
        if self.observables.is_empty() {
            system.state_names().iter().map(|n| DerivedObservable::state(n)).collect()
        } else {
            self.observables.clone()
        }
    }

    /// Check the config against `registry` and return the referenced system.
    pub fn validate(&self, registry: &ModelRegistry) -> Result<Arc<dyn OdeSystem>, DatagenError> {
        let system = registry.get(&self.system)?;
        let invalid = |msg: String| Err(DatagenError::InvalidConfig(msg));

        if self.n_series == 0 {
            return invalid("n_series must be at least 1".into());
        }
        check_names("parameter", &system.parameter_names(), &self.parameters)?;
        check_names("initial condition", &system.state_names(), &self.initial_conditions)?;
        for dist in self.parameters.values().chain(self.initial_conditions.values()) {
            dist.validate()?;
        }
        let grid = self.grid.to_grid()?;
        self.solver.validate()?;

        let observables = self.resolved_observables(system.as_ref());
        let mut names: Vec<&str> = Vec::new();
        for obs in &observables {
            obs.validate(system.as_ref())?;
            if names.contains(&obs.name.as_str()) {
                return invalid(format!("duplicate observable name `{}`", obs.name));
            }
            names.push(&obs.name);
        }
        self.noise.validate()?;
        for t in self.noise.targets() {
            if !names.contains(&t.as_str()) {
                return invalid(format!("noise target `{t}` is not an observable"));
            }
        }

        let shortens = observables.iter().any(|o| matches!(o.transform, Transform::Difference { .. }));
        let length = grid.len() - usize::from(shortens);
        if shortens && length == 0 {
            return invalid("difference observables need at least two grid points".into());
        }
        if let Some(sp) = &self.sparsifier {
            kept_count(length, sp.keep_fraction)?;
        }
        Ok(system)
    }
}

fn check_names(
    what: &str,
    expected: &[String],
    given: &BTreeMap<String, DistributionSpec>,
) -> Result<(), DatagenError> {
    if let Some(missing) = expected.iter().find(|n| !given.contains_key(*n)) {
        return Err(DatagenError::InvalidConfig(format!("missing {what} `{missing}`")));
    }
    if let Some(extra) = given.keys().find(|k| !expected.contains(k)) {
        return Err(DatagenError::InvalidConfig(format!(
            "unknown {what} `{extra}` (expected one of {})",
            expected.join(", ")
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sir_json() -> String {
        r#"{
            "system": "sir",
            "parameters": {
                "beta": {"kind": "uniform", "low": 0.32, "high": 0.35},
                "gamma": {"kind": "uniform", "low": 0.123, "high": 0.125},
                "N": {"kind": "constant", "value": 1000}
            },
            "initial_conditions": {
                "S": {"kind": "constant", "value": 990},
                "I": {"kind": "constant", "value": 10},
                "R": {"kind": "constant", "value": 0}
            },
            "grid": {"kind": "uniform", "start": 0, "step": 1, "count": 20},
            "n_series": 3,
            "master_seed": 11
        }"#
        .to_string()
    }

    #[test]
    fn parses_with_defaults() {
        let cfg = GenerationConfig::from_json(&sir_json()).unwrap();
        assert_eq!(cfg.noise, NoiseSpec::None);
        assert_eq!(cfg.sparsifier, None);
        assert_eq!(cfg.solver, SolverConfig::default());
        let reg = ModelRegistry::with_builtins();
        let sys = cfg.validate(&reg).unwrap();
        assert_eq!(cfg.resolved_observables(sys.as_ref()).len(), 3);
    }

    #[test]
    fn unknown_key_is_named() {
        let json = sir_json().replace("\"n_series\"", "\"bogus\": 1, \"n_series\"");
        let err = GenerationConfig::from_json(&json).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn semantic_errors() {
        let reg = ModelRegistry::with_builtins();
        let mut cfg = GenerationConfig::from_json(&sir_json()).unwrap();
        cfg.parameters.remove("N");
        assert!(cfg.validate(&reg).err().unwrap().to_string().contains("missing parameter `N`"));

        let mut cfg = GenerationConfig::from_json(&sir_json()).unwrap();
        cfg.initial_conditions.insert("X".into(), DistributionSpec::Constant { value: 1.0 });
        assert!(cfg.validate(&reg).is_err());

        let mut cfg = GenerationConfig::from_json(&sir_json()).unwrap();
        cfg.system = "mapk".into();
        assert!(cfg.validate(&reg).is_err());

        let mut cfg = GenerationConfig::from_json(&sir_json()).unwrap();
        cfg.n_series = 0;
        assert!(cfg.validate(&reg).is_err());

        let mut cfg = GenerationConfig::from_json(&sir_json()).unwrap();
        cfg.noise = NoiseSpec::MultiplicativeLognormal { sigma_log: 0.1, targets: vec!["Q".into()] };
        assert!(cfg.validate(&reg).is_err());

        let mut cfg = GenerationConfig::from_json(&sir_json()).unwrap();
        cfg.sparsifier = Some(SparsifierSpec { keep_fraction: 0.05 });
        assert!(matches!(cfg.validate(&reg).err(), Some(DatagenError::TooSparse { .. })));
    }
}
