//! Synthetic time-series generation from ODE systems and config-driven
//! forecasting experiments.
//!
//! The crate is organized along the data path:
//!
//! - [`ode`]: adaptive and implicit integrators, steady-state search.
//! - [`models`]: built-in systems (SIR, SIR with cumulative cases), derived
//!   observables, differencing and moving averages.
//! - [`datagen`]: parameter sampling, noise, sparsification, dataset I/O.
//! - [`ml`]: windowing, regressors, the Student's-t network, metrics.
//! - [`pipelines`]: data-needs and augmentation experiments and the CLI.

pub mod datagen;
mod linalg;
pub mod ml;
pub mod models;
pub mod ode;
pub mod pipelines;
