//! Synthetic degrading-bearing runs with a known failure time.
//!
//! Every snapshot is white noise plus a train of impacts repeating at one
//! defect frequency. Each impact excites a decaying resonance whose peak
//! amplitude grows as `a * exp(b * i)` with the unit index `i`. The run fails
//! at the first unit where that amplitude reaches `failure_level`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::snapshot::{Timestamp, VibrationSnapshot};
use super::{
    characteristic_frequencies, BearingGeometry, BearingRun, IngestError, OperatingCondition,
};
use crate::kv::KvMap;

/// Which defect frequency drives the impact train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultLocation {
    Inner,
    Outer,
    Ball,
}

impl std::str::FromStr for FaultLocation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inner" => Ok(Self::Inner),
            "outer" => Ok(Self::Outer),
            "ball" => Ok(Self::Ball),
            other => Err(format!("unknown fault location {other:?}")),
        }
    }
}

impl std::fmt::Display for FaultLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Inner => "inner",
            Self::Outer => "outer",
            Self::Ball => "ball",
        })
    }
}

/// Degradation profile of a synthetic run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradationProfile {
    /// Impact amplitude at unit 0.
    pub amplitude: f64,
    /// Exponential growth rate per unit; zero gives a stationary run.
    pub growth: f64,
    /// Centre frequency of the excited resonance, Hz.
    pub resonance_hz: f64,
    /// Ring-down decay rate of the resonance, 1/s.
    pub decay_per_s: f64,
    /// Standard deviation of the additive white noise.
    pub noise_std: f64,
    pub fault: FaultLocation,
    /// Impact amplitude defined as failure.
    pub failure_level: f64,
}

impl DegradationProfile {
    /// Noise-free impact amplitude at unit `i`.
    pub fn impact_amplitude(&self, unit: usize) -> f64 {
        self.amplitude * (self.growth * unit as f64).exp()
    }

    /// First unit whose impact amplitude reaches the failure level, or `None`
    /// if the profile never gets there.
    pub fn failure_unit(&self) -> Option<usize> {
        if self.impact_amplitude(1) >= self.failure_level {
            return Some(1);
        }
        if self.growth <= 0.0 {
            return None;
        }
        let estimate = ((self.failure_level / self.amplitude).ln() / self.growth).ceil();
        let mut unit = (estimate.max(1.0) as usize).saturating_sub(1).max(1);
        while self.impact_amplitude(unit) < self.failure_level {
            unit += 1;
        }
        while unit > 1 && self.impact_amplitude(unit - 1) >= self.failure_level {
            unit -= 1;
        }
        Some(unit)
    }
}

/// Everything needed to synthesize a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub id: String,
    pub geometry: BearingGeometry,
    pub condition: OperatingCondition,
    /// Number of snapshots to generate.
    pub length: usize,
    pub profile: DegradationProfile,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            id: "synthetic".into(),
            geometry: BearingGeometry::rig_default(),
            condition: OperatingCondition::rig_default(),
            length: 600,
            profile: DegradationProfile {
                amplitude: 0.01,
                growth: 0.008,
                resonance_hz: 1000.0,
                decay_per_s: 1200.0,
                noise_std: 0.01,
                fault: FaultLocation::Outer,
                failure_level: 1.0,
            },
        }
    }
}

const SPEC_KEYS: &[&str] = &[
    "id",
    "length",
    "ball_count",
    "ball_diameter_mm",
    "pitch_diameter_mm",
    "contact_angle_rad",
    "rotation_frequency_hz",
    "radial_load_n",
    "sampling_frequency_hz",
    "snapshot_length",
    "snapshot_interval_s",
    "amplitude",
    "growth",
    "resonance_hz",
    "decay_per_s",
    "noise_std",
    "fault",
    "failure_level",
];

impl SynthSpec {
    pub fn validate(&self) -> Result<(), IngestError> {
        self.geometry.validate()?;
        self.condition.validate()?;
        let p = &self.profile;
        let invalid = |m: String| Err(IngestError::InvalidSpec(m));
        if self.length == 0 {
            return invalid("run length must be at least 1".into());
        }
        for (name, v) in [
            ("amplitude", p.amplitude),
            ("resonance_hz", p.resonance_hz),
            ("decay_per_s", p.decay_per_s),
            ("noise_std", p.noise_std),
            ("failure_level", p.failure_level),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if !(p.growth >= 0.0 && p.growth.is_finite()) {
            return invalid(format!("growth must be non-negative, got {}", p.growth));
        }
        if p.resonance_hz >= self.condition.nyquist() {
            return invalid(format!(
                "resonance_hz {} is above the Nyquist frequency",
                p.resonance_hz
            ));
        }
        Ok(())
    }

    /// Reads a spec from `key=value` text; absent keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let kv = KvMap::parse(text)?;
        kv.check_keys(SPEC_KEYS)?;
        let d = Self::default();
        let spec = Self {
            id: kv.get_or("id", d.id)?,
            length: kv.get_or("length", d.length)?,
            geometry: BearingGeometry {
                ball_count: kv.get_or("ball_count", d.geometry.ball_count)?,
                ball_diameter: kv.get_or("ball_diameter_mm", d.geometry.ball_diameter)?,
                pitch_diameter: kv.get_or("pitch_diameter_mm", d.geometry.pitch_diameter)?,
                contact_angle: kv.get_or("contact_angle_rad", d.geometry.contact_angle)?,
            },
            condition: OperatingCondition {
                rotation_frequency: kv
                    .get_or("rotation_frequency_hz", d.condition.rotation_frequency)?,
                radial_load: kv.get_or("radial_load_n", d.condition.radial_load)?,
                sampling_frequency: kv
                    .get_or("sampling_frequency_hz", d.condition.sampling_frequency)?,
                snapshot_length: kv.get_or("snapshot_length", d.condition.snapshot_length)?,
                snapshot_interval: kv.get_or("snapshot_interval_s", d.condition.snapshot_interval)?,
            },
            profile: DegradationProfile {
                amplitude: kv.get_or("amplitude", d.profile.amplitude)?,
                growth: kv.get_or("growth", d.profile.growth)?,
                resonance_hz: kv.get_or("resonance_hz", d.profile.resonance_hz)?,
                decay_per_s: kv.get_or("decay_per_s", d.profile.decay_per_s)?,
                noise_std: kv.get_or("noise_std", d.profile.noise_std)?,
                fault: kv.get_or("fault", d.profile.fault)?,
                failure_level: kv.get_or("failure_level", d.profile.failure_level)?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn defect_frequency(&self) -> Result<f64, IngestError> {
        let cf = characteristic_frequencies(&self.geometry, &self.condition)?;
        Ok(match self.profile.fault {
            FaultLocation::Inner => cf.f_inner,
            FaultLocation::Outer => cf.f_outer,
            FaultLocation::Ball => cf.f_ball,
        })
    }
}

/// Generates the run described by `spec`. Each snapshot draws from its own
/// ChaCha stream, so the output depends only on `(spec, seed)`.
pub fn synthesize_run(spec: &SynthSpec, seed: u64) -> Result<BearingRun, IngestError> {
    spec.validate()?;
    let f_defect = spec.defect_frequency()?;
    if f_defect >= spec.condition.nyquist() {
        return Err(IngestError::InvalidSpec(format!(
            "defect frequency {f_defect} Hz is above the Nyquist frequency"
        )));
    }
    let failure_time = spec
        .profile
        .failure_unit()
        .map(|u| u as f64 * spec.condition.snapshot_interval);
    let snapshots = (1..=spec.length)
        .map(|i| synth_snapshot(spec, f_defect, seed, i))
        .collect();
    BearingRun::new(
        spec.id.clone(),
        spec.geometry,
        spec.condition,
        snapshots,
        failure_time,
    )
}

fn synth_snapshot(spec: &SynthSpec, f_defect: f64, seed: u64, unit: usize) -> VibrationSnapshot {
    let p = &spec.profile;
    let fs = spec.condition.sampling_frequency;
    let n = spec.condition.snapshot_length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(unit as u64);

    let period = 1.0 / f_defect;
    let phase = rng.random::<f64>() * period;
    let noise = Normal::new(0.0, p.noise_std).expect("noise_std validated positive");
    let amp = p.impact_amplitude(unit);
    // impacts older than this contribute below 1e-9 of their peak
    let tail = 20.7 / p.decay_per_s;
    let w = 2.0 * PI * p.resonance_hz;

    let duration = n as f64 / fs;
    let first_k = -((tail / period).ceil() as i64);
    let last_k = ((duration - phase) / period).floor() as i64;

    let mut samples: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    let vertical: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    for k in first_k..=last_k {
        let t0 = phase + k as f64 * period;
        let start = (t0 * fs).ceil().max(0.0) as usize;
        let end = (((t0 + tail) * fs).ceil().max(0.0) as usize).min(n);
        for (j, x) in samples.iter_mut().enumerate().take(end).skip(start) {
            let s = j as f64 / fs - t0;
            *x += amp * (-p.decay_per_s * s).exp() * (w * s).sin();
        }
    }

    let t_start = Timestamp {
        hour: 9,
        minute: 0,
        second: 0,
        microsecond: 0,
    }
    .offset_by((unit - 1) as f64 * spec.condition.snapshot_interval);
    VibrationSnapshot {
        index: unit,
        samples,
        vertical,
        timestamp: Some(t_start),
    }
}
