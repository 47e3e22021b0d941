//! Adam training on MSE loss and batch inference over runs.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{backward, CnnGeometry, CnnModel, InputScaling};
use super::CnnError;
use crate::hht::DeiSeries;
use crate::ingest::BearingRun;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub geometry: CnnGeometry,
    pub learning_rate: f64,
    /// Number of optimizer steps.
    pub iterations: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// `None` uses every snapshot in every step.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            geometry: CnnGeometry::canonical(),
            learning_rate: 1e-5,
            iterations: 1000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CnnError> {
        let bad = |m: String| Err(CnnError::InvalidConfig(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)".into());
        }
        if !(self.epsilon > 0.0) {
            return bad("Adam epsilon must be positive".into());
        }
        if self.batch_size == Some(0) {
            return bad("batch size must be at least 1".into());
        }
        self.geometry.shapes()?;
        Ok(())
    }
}

/// First and second moment estimates of Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, config: &TrainConfig) {
    state.step += 1;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powi(state.step as i32);
    let c2 = 1.0 - b2.powi(state.step as i32);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

/// A trained network and the loss seen at each step (before its update).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: CnnModel,
    pub losses: Vec<f64>,
}

/// Trains on raw samples and labels in `(0, 1)`.
pub fn train_on(
    samples: &[&[f64]],
    labels: &[f64],
    config: &TrainConfig,
) -> Result<TrainOutcome, CnnError> {
    config.validate()?;
    if samples.len() != labels.len() || samples.is_empty() {
        return Err(CnnError::LabelMismatch {
            labels: labels.len(),
            snapshots: samples.len(),
        });
    }
    let expected = config.geometry.input_length;
    if let Some((i, s)) = samples.iter().enumerate().find(|(_, s)| s.len() != expected) {
        return Err(CnnError::AtSnapshot {
            index: i + 1,
            source: Box::new(CnnError::Dimension {
                what: "snapshot length",
                expected,
                found: s.len(),
            }),
        });
    }
    let mut model = CnnModel::initialized(config.geometry, config.seed)?;
    model.scaling = InputScaling::fit(samples.iter().copied());
    let mut state = AdamState::new(model.parameter_count());
    let mut losses = Vec::with_capacity(config.iterations);

    let n = samples.len();
    let batch = config.batch_size.filter(|&b| b < n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffler = ChaCha8Rng::seed_from_u64(config.seed);
    shuffler.set_stream(1);
    let mut cursor = n;

    let mut batch_x: Vec<&[f64]> = Vec::new();
    let mut batch_y: Vec<f64> = Vec::new();
    for _ in 0..config.iterations {
        let grads = match batch {
            None => backward(&model, samples, labels)?,
            Some(b) => {
                batch_x.clear();
                batch_y.clear();
                while batch_x.len() < b {
                    if cursor == n {
                        order.shuffle(&mut shuffler);
                        cursor = 0;
                    }
                    batch_x.push(samples[order[cursor]]);
                    batch_y.push(labels[order[cursor]]);
                    cursor += 1;
                }
                backward(&model, &batch_x, &batch_y)?
            }
        };
        losses.push(grads.loss);
        adam_step(model.params_mut(), &grads.values, &mut state, config);
    }
    Ok(TrainOutcome { model, losses })
}

/// Trains the network to map each snapshot of `run` to its normalized DEI.
pub fn train(
    run: &BearingRun,
    labels: &DeiSeries,
    config: &TrainConfig,
) -> Result<TrainOutcome, CnnError> {
    if !labels.normalized {
        return Err(CnnError::NotNormalized);
    }
    if labels.len() != run.len() {
        return Err(CnnError::LabelMismatch {
            labels: labels.len(),
            snapshots: run.len(),
        });
    }
    let samples: Vec<&[f64]> = run.snapshots.iter().map(|s| s.samples.as_slice()).collect();
    train_on(&samples, &labels.values, config)
}

/// Network output for every snapshot of `run`, in index order.
pub fn estimate_dei(model: &CnnModel, run: &BearingRun) -> Result<DeiSeries, CnnError> {
    let values = run
        .snapshots
        .par_iter()
        .map(|s| {
            model.forward(&s.samples).map_err(|e| CnnError::AtSnapshot {
                index: s.index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DeiSeries {
        values,
        normalized: true,
        scale: None,
        unit_interval: run.condition.snapshot_interval,
    })
}

/// `iteration,loss` rows, 1-based.
pub fn write_loss_log(losses: &[f64]) -> String {
    let mut out = String::from("iteration,loss\n");
    for (i, l) in losses.iter().enumerate() {
        let _ = writeln!(out, "{},{l:?}", i + 1);
    }
    out
}
