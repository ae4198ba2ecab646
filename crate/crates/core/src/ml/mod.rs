//! Windowed forecasting datasets, native regressors, the Student's-t head
//! and evaluation metrics.

mod forest;
mod knn;
mod linear;
mod matrix;
mod metrics;
mod model;
mod nn;
mod special;
mod student_t;
mod tree;
mod window;

pub use forest::{fit_forest, predict_forest, ForestModel, ForestSpec};
pub use knn::{fit_knn, predict_knn, KnnModel, KnnSpec};
pub use linear::{fit_linear, predict_linear, LinearModel, LinearSpec};
pub use matrix::Matrix;
pub use metrics::{metric_nrmse, Metrics};
pub use model::{Fitted, Forecaster, ModelSpec, TrainedModel, Trainer};
pub use nn::{loss_and_gradient, nn_forward, nn_train, Head, Layer, NnModel, NnParams, NnSpec};
pub use special::{ln_gamma, digamma, regularized_incomplete_beta};
pub use student_t::{interval, student_t_nll, t_cdf, t_quantile, ForecastDistribution, StudentT};
pub use tree::{fit_tree, predict_tree, Node, TreeModel, TreeSpec};
pub use window::{make_windows, window_count, Normalization, WindowedDataset};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlError {
    #[error("series {index} has {len} points, need at least {needed}")]
    SeriesTooShort { index: usize, len: usize, needed: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset contains non-finite values")]
    NonFiniteData,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),
    #[error("level {0} is outside (0, 1)")]
    InvalidLevel(f64),
    #[error("k = {k} exceeds the {n} training samples")]
    KTooLarge { k: usize, n: usize },
    #[error("normal equations are singular (pivot below tolerance)")]
    DegenerateDesign,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("model serialization failed: {0}")]
    Serialization(String),
}
