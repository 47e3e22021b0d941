//! Bearing geometry, operating conditions and kinematic defect frequencies.

use std::f64::consts::FRAC_PI_2;

use super::IngestError;

/// Physical geometry of a rolling-element bearing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingGeometry {
    /// Number of rolling elements.
    pub ball_count: u32,
    /// Ball diameter in mm.
    pub ball_diameter: f64,
    /// Pitch diameter in mm.
    pub pitch_diameter: f64,
    /// Contact angle in radians.
    pub contact_angle: f64,
}

impl BearingGeometry {
    pub fn new(
        ball_count: u32,
        ball_diameter: f64,
        pitch_diameter: f64,
        contact_angle: f64,
    ) -> Result<Self, IngestError> {
        let g = Self {
            ball_count,
            ball_diameter,
            pitch_diameter,
            contact_angle,
        };
        g.validate()?;
        Ok(g)
    }

    /// The test-rig bearing used for the first operating condition
    /// (13 balls, 3.5 mm balls on a 25.6 mm pitch circle, zero contact angle).
    pub fn rig_default() -> Self {
        Self {
            ball_count: 13,
            ball_diameter: 3.5,
            pitch_diameter: 25.6,
            contact_angle: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.ball_count < 1 {
            return Err(IngestError::InvalidGeometry("ball_count must be at least 1".into()));
        }
        if !(self.ball_diameter > 0.0 && self.ball_diameter < self.pitch_diameter) {
            return Err(IngestError::InvalidGeometry(format!(
                "need 0 < ball_diameter < pitch_diameter, got {} and {}",
                self.ball_diameter, self.pitch_diameter
            )));
        }
        if !(self.contact_angle >= 0.0 && self.contact_angle < FRAC_PI_2) {
            return Err(IngestError::InvalidGeometry(format!(
                "contact_angle must lie in [0, pi/2), got {}",
                self.contact_angle
            )));
        }
        Ok(())
    }

    fn diameter_ratio_cos(&self) -> f64 {
        self.ball_diameter / self.pitch_diameter * self.contact_angle.cos()
    }
}

/// Shaft speed, load and acquisition settings of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingCondition {
    /// Shaft rotation frequency in Hz.
    pub rotation_frequency: f64,
    /// Radial load in N.
    pub radial_load: f64,
    /// Accelerometer sampling frequency in Hz.
    pub sampling_frequency: f64,
    /// Samples per snapshot.
    pub snapshot_length: usize,
    /// Seconds between the starts of consecutive snapshots.
    pub snapshot_interval: f64,
}

impl OperatingCondition {
    pub fn new(
        rotation_frequency: f64,
        radial_load: f64,
        sampling_frequency: f64,
        snapshot_length: usize,
        snapshot_interval: f64,
    ) -> Result<Self, IngestError> {
        let c = Self {
            rotation_frequency,
            radial_load,
            sampling_frequency,
            snapshot_length,
            snapshot_interval,
        };
        c.validate()?;
        Ok(c)
    }

    /// 1800 rpm, 4000 N, 2560 samples at 25.6 kHz every 10 s.
    pub fn rig_default() -> Self {
        Self {
            rotation_frequency: 30.0,
            radial_load: 4000.0,
            sampling_frequency: 25_600.0,
            snapshot_length: 2560,
            snapshot_interval: 10.0,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let positive = [
            ("rotation_frequency", self.rotation_frequency),
            ("radial_load", self.radial_load),
            ("sampling_frequency", self.sampling_frequency),
            ("snapshot_interval", self.snapshot_interval),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(IngestError::InvalidCondition(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.snapshot_length == 0 {
            return Err(IngestError::InvalidCondition(
                "snapshot_length must be positive".into(),
            ));
        }
        if self.snapshot_duration() >= self.snapshot_interval {
            return Err(IngestError::InvalidCondition(format!(
                "snapshot lasts {} s, which does not fit in the {} s interval",
                self.snapshot_duration(),
                self.snapshot_interval
            )));
        }
        Ok(())
    }

    pub fn snapshot_duration(&self) -> f64 {
        self.snapshot_length as f64 / self.sampling_frequency
    }

    pub fn nyquist(&self) -> f64 {
        self.sampling_frequency / 2.0
    }
}

/// Defect frequencies of the inner race, outer race and balls, in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicFrequencies {
    pub f_inner: f64,
    pub f_outer: f64,
    pub f_ball: f64,
}

impl CharacteristicFrequencies {
    pub fn as_array(&self) -> [f64; 3] {
        [self.f_inner, self.f_outer, self.f_ball]
    }
}

/// Kinematic defect frequencies for `geometry` turning at the condition's
/// shaft speed.
///
/// The ball frequency uses the `pitch/ball` prefactor (ball spin form):
/// `f_ball = (d_p/d_b) f_w (1 - (d_b/d_p)^2 cos^2 phi)`. With the `ball/pitch`
/// prefactor the rig bearing would give about 4 Hz instead of the ~215 Hz
/// observed on the rig.
pub fn characteristic_frequencies(
    geometry: &BearingGeometry,
    condition: &OperatingCondition,
) -> Result<CharacteristicFrequencies, IngestError> {
    geometry.validate()?;
    condition.validate()?;
    let half_n_fw = geometry.ball_count as f64 / 2.0 * condition.rotation_frequency;
    let r = geometry.diameter_ratio_cos();
    Ok(CharacteristicFrequencies {
        f_inner: half_n_fw * (1.0 + r),
        f_outer: half_n_fw * (1.0 - r),
        f_ball: geometry.pitch_diameter / geometry.ball_diameter
            * condition.rotation_frequency
            * (1.0 - r * r),
    })
}
