//! Synthetic dataset generation: sample parameters and initial conditions,
//! integrate, evaluate observables, add noise, sparsify, and store.

mod config;
mod distribution;
mod generate;
mod noise;
mod seed;
mod sparsify;
mod storage;

use std::collections::BTreeMap;

use thiserror::Error;

pub use config::{GenerationConfig, GridSpec, SolverMethod};
pub use distribution::{sample, DistributionSpec};
pub use generate::{generate, generate_range, generate_series, generate_with, Dataset, Series};
pub use noise::{add_additive_gaussian, add_lognormal, NoiseSpec, SigmaScale};
pub use seed::{rng_from_seed, seed_for, splitmix64, SimRng};
pub use sparsify::{kept_count, sparsify, sparsify_indices, SparsifierSpec};
pub use storage::{read_csv, write_csv};
pub(crate) use storage::format_float;


use crate::models::ModelError;
use crate::ode::OdeError;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid distribution or noise spec: {0}")]
    InvalidSpec(String),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("lognormal noise needs nonnegative input, got {value} at index {index}")]
    NegativeInput { index: usize, value: f64 },
    #[error("keeping a fraction {keep_fraction} of {len} points leaves fewer than 2")]
    TooSparse { len: usize, keep_fraction: f64 },
    #[error("series {index} contains non-finite values")]
    NonFiniteValues { index: usize },
    #[error("series {index} (parameters {parameters:?}): {source}")]
    Solver {
        index: usize,
        parameters: BTreeMap<String, f64>,
        #[source]
        source: OdeError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("dataset does not match its manifest: {0}")]
    SchemaMismatch(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
