//! Remaining-useful-life prognostics for rolling-element bearings.
//!
//! The pipeline has three stages:
//!
//! 1. [`hht`] turns each vibration snapshot of a run-to-failure training
//!    bearing into a degradation energy indicator (DEI): the peak of the
//!    marginal Hilbert spectrum at the bearing's defect frequencies.
//! 2. [`cnn`] trains a 1-D convolutional network that maps raw snapshots to
//!    the normalized DEI, so test bearings skip the costly decomposition.
//! 3. [`svr`] fits an epsilon-SVR on sliding-window statistics of the DEI and
//!    rolls it forward until the failure threshold is crossed.
//!
//! [`prognostics`] wires the stages together and scores the predictions.

pub mod cnn;
pub mod hht;
pub mod ingest;
pub mod kv;
pub mod prognostics;
pub mod svr;
