//! One-dimensional convolutional network that regresses the normalized DEI
//! directly from a raw vibration snapshot.

mod io;
mod model;
mod tensor;
mod train;

pub use io::{load_model, read_model, save_model, write_model};
pub use model::{
    backward, mse_loss, Activations, CnnGeometry, CnnModel, Gradients, InputScaling, ShapeChain,
    TENSOR_NAMES,
};
pub use tensor::{
    conv_forward, dense_forward, maxpool_forward, relu, sigmoid, Array3, ConvLayer, ConvShape,
    PoolShape,
};
pub use train::{
    adam_step, estimate_dei, train, train_on, write_loss_log, AdamState, TrainConfig,
    TrainOutcome,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CnnError {
    #[error("{what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{labels} labels for {snapshots} snapshots")]
    LabelMismatch { labels: usize, snapshots: usize },
    #[error("training labels must be a normalized DEI series")]
    NotNormalized,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("snapshot {index}: {source}")]
    AtSnapshot {
        index: usize,
        #[source]
        source: Box<CnnError>,
    },
    #[error("not a CNN-DEI v1 model file (header {found:?})")]
    Version { found: String },
    #[error("model file line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("model file is truncated inside tensor {tensor}")]
    Truncated { tensor: String },
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
