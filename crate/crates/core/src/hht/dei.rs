//! Degradation energy indicator: the largest marginal Hilbert spectrum mass
//! near any of the bearing's defect frequencies, one value per snapshot.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::emd::emd;
use super::spectrum::{hilbert_spectrum, marginal_spectrum, FrequencyGrid, MarginalSpectrum};
use super::{HhtConfig, HhtError};
use crate::ingest::{BearingRun, CharacteristicFrequencies};

/// Min/max mapping applied to a raw series, kept so other runs can be
/// mapped onto the same scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub min: f64,
    pub max: f64,
    pub eps: f64,
}

impl Normalization {
    /// `(v - min) / (max - min)`, clamped to `[eps, 1 - eps]`.
    pub fn apply(&self, v: f64) -> f64 {
        ((v - self.min) / (self.max - self.min)).clamp(self.eps, 1.0 - self.eps)
    }
}

/// Per-unit DEI values of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DeiSeries {
    pub values: Vec<f64>,
    /// Values live in `(0, 1)`.
    pub normalized: bool,
    /// Present when the series was produced by min/max normalization.
    pub scale: Option<Normalization>,
    /// Seconds between consecutive units.
    pub unit_interval: f64,
}

impl DeiSeries {
    pub fn raw(values: Vec<f64>, unit_interval: f64) -> Self {
        Self {
            values,
            normalized: false,
            scale: None,
            unit_interval,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// DEI of one marginal spectrum: the maximum mass within `band` bins of
/// each defect frequency, maximised over the three frequencies.
pub fn dei(
    ms: &MarginalSpectrum,
    cf: &CharacteristicFrequencies,
    band: usize,
) -> Result<f64, HhtError> {
    let nyquist = ms.grid.nyquist();
    let mut best = 0.0f64;
    for f in cf.as_array() {
        if !(f >= 0.0 && f < nyquist) {
            return Err(HhtError::OutOfBand {
                frequency: f,
                nyquist,
            });
        }
        let centre = ms.grid.bin_of(f);
        let lo = centre.saturating_sub(band);
        let hi = (centre + band).min(ms.grid.bins - 1);
        let peak = ms.mass[lo..=hi].iter().fold(0.0f64, |m, &v| m.max(v));
        best = best.max(peak);
    }
    Ok(best)
}

/// Full HHT chain for one snapshot: EMD, Hilbert spectrum, marginal
/// spectrum, DEI.
pub fn snapshot_dei(
    samples: &[f64],
    sampling_frequency: f64,
    cf: &CharacteristicFrequencies,
    config: &HhtConfig,
) -> Result<f64, HhtError> {
    let grid = FrequencyGrid::for_snapshot(sampling_frequency, samples.len());
    let imfs = emd(samples, &config.sift);
    let ms = marginal_spectrum(&hilbert_spectrum(&imfs, grid));
    dei(&ms, cf, config.band_half_width)
}

/// Raw DEI of every snapshot of `run`, in index order. Snapshots are
/// processed in parallel; each value depends only on its own snapshot.
pub fn dei_series(
    run: &BearingRun,
    cf: &CharacteristicFrequencies,
    config: &HhtConfig,
) -> Result<DeiSeries, HhtError> {
    let fs = run.condition.sampling_frequency;
    let values = run
        .snapshots
        .par_iter()
        .map(|s| {
            snapshot_dei(&s.samples, fs, cf, config).map_err(|e| HhtError::AtSnapshot {
                index: s.index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DeiSeries::raw(values, run.condition.snapshot_interval))
}

/// Min/max normalizes a raw series and clamps into `[eps, 1 - eps]`.
pub fn normalize(series: &DeiSeries, eps: f64) -> Result<DeiSeries, HhtError> {
    if series.normalized {
        return Err(HhtError::AlreadyNormalized);
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(HhtError::InvalidEps(eps));
    }
    let (min, max) = series
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(max > min) {
        return Err(HhtError::DegenerateRange);
    }
    normalize_with(series, Normalization { min, max, eps })
}

/// Maps a raw series onto an existing scale (e.g. the training run's).
pub fn normalize_with(series: &DeiSeries, scale: Normalization) -> Result<DeiSeries, HhtError> {
    if series.normalized {
        return Err(HhtError::AlreadyNormalized);
    }
    if !(scale.max > scale.min) {
        return Err(HhtError::DegenerateRange);
    }
    Ok(DeiSeries {
        values: series.values.iter().map(|&v| scale.apply(v)).collect(),
        normalized: true,
        scale: Some(scale),
        unit_interval: series.unit_interval,
    })
}

const HEADER_TAG: &str = "# DEI v1";

/// Two-column text: a header carrying the normalization, then
/// `unit_index,value` rows.
pub fn write_dei(series: &DeiSeries) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{HEADER_TAG} normalized={} unit_interval={:?}",
        series.normalized, series.unit_interval
    );
    match series.scale {
        Some(s) => {
            let _ = writeln!(out, " min={:?} max={:?} eps={:?}", s.min, s.max, s.eps);
        }
        None => out.push('\n'),
    }
    out.push_str("unit_index,value\n");
    for (i, v) in series.values.iter().enumerate() {
        let _ = writeln!(out, "{},{v:?}", i + 1);
    }
    out
}

pub fn read_dei(text: &str) -> Result<DeiSeries, HhtError> {
    let bad = |line: usize, m: &str| HhtError::Format {
        line,
        message: m.to_owned(),
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let rest = header
        .strip_prefix(HEADER_TAG)
        .ok_or_else(|| bad(1, "missing '# DEI v1' header"))?;
    let mut normalized = None;
    let mut interval = None;
    let (mut min, mut max, mut eps) = (None, None, None);
    for field in rest.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| bad(1, "malformed header field"))?;
        let num = || v.parse::<f64>().map_err(|_| bad(1, "malformed header number"));
        match k {
            "normalized" => {
                normalized = Some(v.parse::<bool>().map_err(|_| bad(1, "malformed flag"))?)
            }
            "unit_interval" => interval = Some(num()?),
            "min" => min = Some(num()?),
            "max" => max = Some(num()?),
            "eps" => eps = Some(num()?),
            _ => return Err(bad(1, "unknown header field")),
        }
    }
    let scale = match (min, max, eps) {
        (Some(min), Some(max), Some(eps)) => Some(Normalization { min, max, eps }),
        (None, None, None) => None,
        _ => return Err(bad(1, "min, max and eps must appear together")),
    };
    let mut values = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with("unit_index") {
            continue;
        }
        let (idx, v) = line.split_once(',').ok_or_else(|| bad(i + 1, "expected index,value"))?;
        let idx: usize = idx.trim().parse().map_err(|_| bad(i + 1, "bad unit index"))?;
        if idx != values.len() + 1 {
            return Err(bad(i + 1, "unit indices must run 1..N"));
        }
        values.push(v.trim().parse::<f64>().map_err(|_| bad(i + 1, "bad value"))?);
    }
    Ok(DeiSeries {
        values,
        normalized: normalized.ok_or_else(|| bad(1, "missing normalized flag"))?,
        scale,
        unit_interval: interval.ok_or_else(|| bad(1, "missing unit_interval"))?,
    })
}
