//! Epsilon-support-vector regression on sliding-window statistics of a DEI
//! series, and recursive forecasting to a failure threshold.

mod features;
mod io;
mod model;
mod smo;

pub use features::{
    kernel_matrix, median_distance, rbf_kernel, window_count, window_features, SvrTrainingSet,
    WindowFeature,
};
pub use io::{load_svr, read_svr, save_svr, write_svr};
pub use model::{
    forecast_until, train_svr, write_forecast, ForecastResult, KernelWidth, SvrFit, SvrModel,
    SvrParams,
};
pub use smo::{dual_objective, solve_dual, DualSolution, SmoConfig};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvrError {
    #[error("series of length {len} is too short, need at least {needed} values")]
    TooShort { len: usize, needed: usize },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("empty training set")]
    Empty,
    #[error("SMO stopped after {iterations} pair updates with KKT violation {violation:e}")]
    NotConverged { violation: f64, iterations: usize },
    #[error("not an SVR v1 model file (header {found:?})")]
    Version { found: String },
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
