//! Built-in ODE systems, derived observables, and series preprocessing.

mod linear;
mod observable;
mod preprocess;
mod registry;
mod sir;

use thiserror::Error;

pub use linear::LinearDecay;
pub use observable::{evaluate_observable, Denominator, DerivedObservable, ObservableSeries, StateRef, Transform};
pub use preprocess::{finite_difference, moving_average};
pub use registry::ModelRegistry;
pub use sir::{sir_cumulative_rhs, sir_rhs, Sir, SirCumulative, SirCumulativeState, SirParams, SirState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("series of length {len} is too short (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },
    #[error("moving-average window {window} is invalid for a series of length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("state index {index} out of range for a system of dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("observable `{0}` has a zero or non-finite denominator")]
    InvalidDenominator(String),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("system `{0}` is already registered")]
    DuplicateSystem(String),
}
