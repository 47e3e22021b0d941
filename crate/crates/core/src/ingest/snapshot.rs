//! Rig-format snapshot files.
//!
//! Each row is `hour,minute,second,microsecond,horizontal,vertical`; rows may
//! also be separated by `;` as some rig exports do. Only the horizontal
//! channel feeds the pipeline, the vertical one is kept for completeness.

use std::fmt::Write as _;

use super::IngestError;

/// Wall-clock stamp carried by the first row of a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timestamp {
    pub hour: u32,
    pub minute: u32,
    pub second: u32,
    pub microsecond: u32,
}

impl Timestamp {
    fn total_micros(&self) -> u64 {
        ((self.hour as u64 * 60 + self.minute as u64) * 60 + self.second as u64) * 1_000_000
            + self.microsecond as u64
    }

    fn from_total_micros(us: u64) -> Self {
        let micros_per_day = 24 * 3600 * 1_000_000;
        let us = us % micros_per_day;
        let secs = us / 1_000_000;
        Self {
            hour: (secs / 3600) as u32,
            minute: (secs / 60 % 60) as u32,
            second: (secs % 60) as u32,
            microsecond: (us % 1_000_000) as u32,
        }
    }

    /// Stamp of a snapshot taken `seconds` after this one.
    pub fn offset_by(&self, seconds: f64) -> Self {
        Self::from_total_micros(self.total_micros() + (seconds * 1e6).round() as u64)
    }
}

/// One fixed-length vibration recording.
#[derive(Debug, Clone, PartialEq)]
pub struct VibrationSnapshot {
    /// 1-based position in the owning run.
    pub index: usize,
    /// Horizontal acceleration samples.
    pub samples: Vec<f64>,
    /// Vertical acceleration samples (parsed, not used by the pipeline).
    pub vertical: Vec<f64>,
    pub timestamp: Option<Timestamp>,
}

impl VibrationSnapshot {
    pub fn new(index: usize, samples: Vec<f64>) -> Self {
        Self {
            index,
            vertical: vec![0.0; samples.len()],
            samples,
            timestamp: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn parse_field<T: std::str::FromStr>(tok: &str, row: usize, col: usize) -> Result<T, IngestError> {
    tok.trim().parse().map_err(|_| IngestError::Parse {
        row,
        message: format!("column {col}: cannot parse {:?}", tok.trim()),
    })
}

/// Parses one snapshot file holding exactly `expected_len` rows.
///
/// Blank lines are skipped. Row numbers in errors are 1-based and count
/// non-blank rows.
pub fn parse_snapshot(
    text: &str,
    expected_len: usize,
    index: usize,
) -> Result<VibrationSnapshot, IngestError> {
    let mut horizontal = Vec::with_capacity(expected_len);
    let mut vertical = Vec::with_capacity(expected_len);
    let mut timestamp = None;
    for (i, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let row = i + 1;
        let delim = if line.contains(';') { ';' } else { ',' };
        let fields: Vec<&str> = line.split(delim).collect();
        if fields.len() != 6 {
            return Err(IngestError::Parse {
                row,
                message: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let stamp = Timestamp {
            hour: parse_field(fields[0], row, 1)?,
            minute: parse_field(fields[1], row, 2)?,
            second: parse_field(fields[2], row, 3)?,
            // some exports write the microsecond field as a float
            microsecond: parse_field::<f64>(fields[3], row, 4)? as u32,
        };
        let h: f64 = parse_field(fields[4], row, 5)?;
        let v: f64 = parse_field(fields[5], row, 6)?;
        if !h.is_finite() || !v.is_finite() {
            return Err(IngestError::Parse {
                row,
                message: "non-finite acceleration".into(),
            });
        }
        if row == 1 {
            timestamp = Some(stamp);
        }
        horizontal.push(h);
        vertical.push(v);
    }
    if horizontal.len() != expected_len {
        return Err(IngestError::LengthMismatch {
            expected: expected_len,
            found: horizontal.len(),
        });
    }
    Ok(VibrationSnapshot {
        index,
        samples: horizontal,
        vertical,
        timestamp,
    })
}

/// Writes a snapshot in rig format. Per-row stamps are generated from the
/// first-row stamp at the given sampling frequency; accelerations use the
/// shortest decimal form that reads back to the same `f64`.
pub fn write_snapshot(snapshot: &VibrationSnapshot, sampling_frequency: f64) -> String {
    let start = snapshot.timestamp.unwrap_or(Timestamp {
        hour: 0,
        minute: 0,
        second: 0,
        microsecond: 0,
    });
    let mut out = String::with_capacity(snapshot.len() * 40);
    for (k, (h, v)) in snapshot.samples.iter().zip(&snapshot.vertical).enumerate() {
        let t = start.offset_by(k as f64 / sampling_frequency);
        let _ = writeln!(
            out,
            "{},{},{},{},{h:?},{v:?}",
            t.hour, t.minute, t.second, t.microsecond
        );
    }
    out
}
