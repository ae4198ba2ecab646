use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{LinearDecay, ModelError, Sir, SirCumulative};
use crate::ode::OdeSystem;

/// String-keyed lookup of ODE systems.
#[derive(Clone, Default)]
pub struct ModelRegistry {
    systems: BTreeMap<String, Arc<dyn OdeSystem>>,
}

impl fmt::Debug for ModelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelRegistry").field("ids", &self.ids().collect::<Vec<_>>()).finish()
    }
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding `sir`, `sir_cumulative`, and `linear_decay`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::new();
        reg.systems.insert("sir".into(), Arc::new(Sir));
        reg.systems.insert("sir_cumulative".into(), Arc::new(SirCumulative));
        reg.systems.insert("linear_decay".into(), Arc::new(LinearDecay));
        reg
    }

    pub fn register(&mut self, id: impl Into<String>, system: Arc<dyn OdeSystem>) -> Result<(), ModelError> {
        let id = id.into();
        if self.systems.contains_key(&id) {
            return Err(ModelError::DuplicateSystem(id));
        }
        self.systems.insert(id, system);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn OdeSystem>, ModelError> {
        self.systems.get(id).cloned().ok_or_else(|| ModelError::UnknownSystem(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.systems.keys().map(String::as_str)
    }
}
