//! Hilbert-Huang transform of vibration snapshots and the degradation
//! energy indicator built on it.

pub mod dei;
pub mod emd;
pub mod hilbert;
pub mod spectrum;
mod spline;

pub use dei::{
    dei, dei_series, normalize, normalize_with, read_dei, snapshot_dei, write_dei, DeiSeries,
    Normalization,
};
pub use emd::{emd, is_valid_imf, sift, Imf, ImfSet, SiftConfig};
pub use hilbert::{hilbert_transform, instantaneous_attributes, AnalyticSeries};
pub use spectrum::{
    hilbert_spectrum, marginal_spectrum, FrequencyGrid, HilbertSpectrum, MarginalSpectrum,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HhtError {
    #[error("signal has too few extrema to sift")]
    NotSiftable,
    #[error("characteristic frequency {frequency} Hz is outside [0, {nyquist}) Hz")]
    OutOfBand { frequency: f64, nyquist: f64 },
    #[error("DEI series is constant; min/max normalization is undefined")]
    DegenerateRange,
    #[error("DEI series is already normalized")]
    AlreadyNormalized,
    #[error("normalization epsilon must lie in (0, 0.5), got {0}")]
    InvalidEps(f64),
    #[error("snapshot {index}: {source}")]
    AtSnapshot {
        index: usize,
        #[source]
        source: Box<HhtError>,
    },
    #[error("DEI file line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Settings of the snapshot-to-DEI chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhtConfig {
    /// Bins searched on either side of each defect frequency.
    pub band_half_width: usize,
    pub sift: SiftConfig,
}

impl Default for HhtConfig {
    fn default() -> Self {
        Self {
            band_half_width: 2,
            sift: SiftConfig::default(),
        }
    }
}
