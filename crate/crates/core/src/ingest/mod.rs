//! Vibration data: bearing geometry, rig-format files, runs and a synthetic
//! run generator.

mod geometry;
mod run;
mod snapshot;
mod synth;

use std::path::PathBuf;

use thiserror::Error;

pub use geometry::{
    characteristic_frequencies, BearingGeometry, CharacteristicFrequencies, OperatingCondition,
};
pub use run::{load_run, write_run, BearingRun, RunManifest, MANIFEST_FILE};
pub use snapshot::{parse_snapshot, write_snapshot, Timestamp, VibrationSnapshot};
pub use synth::{synthesize_run, DegradationProfile, FaultLocation, SynthSpec};

use crate::kv::KvError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid bearing geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid operating condition: {0}")]
    InvalidCondition(String),
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("snapshot {index} contains non-finite samples")]
    NonFinite { index: usize },
    #[error("missing snapshot file with number {name}")]
    MissingSnapshot { name: String },
    #[error("run contains no snapshots")]
    EmptyRun,
    #[error("snapshot at position {position} has index {index}")]
    NonContiguous { position: usize, index: usize },
    #[error("cannot truncate a run of {len} units to {units}")]
    InvalidTruncation { units: usize, len: usize },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: Box<IngestError>,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Config(#[from] KvError),
}
