//! Failure threshold, RUL metrics and the end-to-end pipeline.

mod config;
mod metrics;
mod pipeline;

pub use config::{PipelineConfig, SvrSource, CONFIG_KEYS};
pub use metrics::{eta, failure_threshold, relative_error, rul_from_steps};
pub use pipeline::{
    fit_forecaster, render_delimited, render_human, render_timings, report_for, run_pipeline,
    BearingTimings, PipelineOutput, RulReport, StageTimings,
};

use thiserror::Error;

use crate::cnn::CnnError;
use crate::hht::HhtError;
use crate::ingest::IngestError;
use crate::kv::KvError;
use crate::svr::SvrError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Extraction,
    CnnTraining,
    Estimation,
    SvrTraining,
    Forecast,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Extraction => "DEI extraction",
            Stage::CnnTraining => "CNN training",
            Stage::Estimation => "DEI estimation",
            Stage::SvrTraining => "SVR training",
            Stage::Forecast => "forecast",
        })
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Hht(#[from] HhtError),
    #[error(transparent)]
    Cnn(#[from] CnnError),
    #[error(transparent)]
    Svr(#[from] SvrError),
}

#[derive(Debug, Error)]
pub enum PrognosticsError {
    #[error("DEI series is empty")]
    EmptySeries,
    #[error("step count must be at least 1")]
    InvalidSteps,
    #[error("snapshot interval must be positive, got {0}")]
    InvalidInterval(f64),
    #[error("true RUL must be positive, got {0}")]
    NonPositiveTrueRul(f64),
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error("{stage} stage, bearing {bearing}: {source}")]
    Stage {
        stage: Stage,
        bearing: String,
        #[source]
        source: StageError,
    },
}
