//! Empirical mode decomposition by envelope-mean sifting.
//!
//! Envelopes are natural cubic splines through the local maxima (minima),
//! with the two outermost extrema on each side mirrored about the end
//! samples to tame end swings.

use super::spline::natural_cubic_at_samples;
use super::HhtError;

/// Sifting and decomposition limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftConfig {
    /// Cauchy-type stop: sifting ends once the next envelope mean carries
    /// less than this fraction of the candidate's energy.
    pub sd_threshold: f64,
    /// Hard cap on sifting passes per IMF.
    pub max_sifts: usize,
    /// Hard cap on the number of IMFs.
    pub max_imfs: usize,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            sd_threshold: 0.2,
            max_sifts: 100,
            max_imfs: 15,
        }
    }
}

/// One intrinsic mode function.
#[derive(Debug, Clone, PartialEq)]
pub struct Imf {
    pub values: Vec<f64>,
    /// 1-based, fastest oscillation first.
    pub mode_index: usize,
}

/// Result of decomposing one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ImfSet {
    pub imfs: Vec<Imf>,
    pub residual: Vec<f64>,
}

impl ImfSet {
    pub fn len(&self) -> usize {
        self.residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual.is_empty()
    }

    /// Sum of all IMFs and the residual.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residual.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(&imf.values) {
                *o += v;
            }
        }
        out
    }
}

/// Interior local maxima and minima. A plateau counts once, at its first
/// sample.
pub fn extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    if x.len() < 3 {
        return (maxima, minima);
    }
    for i in 1..x.len() - 1 {
        if x[i] > x[i - 1] && x[i] >= x[i + 1] {
            maxima.push(i);
        } else if x[i] < x[i - 1] && x[i] <= x[i + 1] {
            minima.push(i);
        }
    }
    (maxima, minima)
}

/// Number of sign changes, ignoring exact zeros.
pub fn zero_crossings(x: &[f64]) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for &v in x {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

fn is_monotone(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] >= w[0]) || x.windows(2).all(|w| w[1] <= w[0])
}

/// Extrema and zero-crossing counts differ by at most one.
pub fn satisfies_count_condition(x: &[f64]) -> bool {
    let (maxima, minima) = extrema(x);
    (maxima.len() + minima.len()).abs_diff(zero_crossings(x)) <= 1
}

fn envelope(x: &[f64], idx: &[usize]) -> Vec<f64> {
    let last = (x.len() - 1) as f64;
    let (a, b) = (idx[0], idx[1]);
    let (y, z) = (idx[idx.len() - 2], idx[idx.len() - 1]);
    let mut xs = Vec::with_capacity(idx.len() + 4);
    let mut ys = Vec::with_capacity(idx.len() + 4);
    xs.extend([-(b as f64), -(a as f64)]);
    ys.extend([x[b], x[a]]);
    for &i in idx {
        xs.push(i as f64);
        ys.push(x[i]);
    }
    xs.extend([2.0 * last - z as f64, 2.0 * last - y as f64]);
    ys.extend([x[z], x[y]]);
    natural_cubic_at_samples(&xs, &ys, x.len())
}

/// Mean of the upper and lower envelopes, or `None` when there are fewer
/// than two maxima or two minima.
pub fn envelope_mean(x: &[f64]) -> Option<Vec<f64>> {
    let (maxima, minima) = extrema(x);
    if maxima.len() < 2 || minima.len() < 2 {
        return None;
    }
    let upper = envelope(x, &maxima);
    let lower = envelope(x, &minima);
    Some(upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect())
}

fn energy_ratio(num: &[f64], den: &[f64]) -> f64 {
    let n: f64 = num.iter().map(|v| v * v).sum();
    let d: f64 = den.iter().map(|v| v * v).sum();
    if d == 0.0 {
        if n == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        n / d
    }
}

/// Ratio of envelope-mean energy to signal energy, the quantity the
/// sifting stop compares against `sd_threshold`. `None` if envelopes
/// cannot be formed.
pub fn envelope_mean_ratio(x: &[f64]) -> Option<f64> {
    envelope_mean(x).map(|m| energy_ratio(&m, x))
}

/// Whether `x` meets both IMF conditions: extrema and zero crossings differ
/// by at most one, and the envelope mean is small relative to the signal
/// (energy ratio below `sd_threshold`).
pub fn is_valid_imf(x: &[f64], sd_threshold: f64) -> bool {
    satisfies_count_condition(x)
        && envelope_mean_ratio(x).is_none_or(|r| r < sd_threshold)
}

/// Extracts one IMF from `signal`. Returns `(imf, signal - imf)`.
///
/// Each pass subtracts the envelope mean. Sifting stops once the candidate
/// satisfies the extrema/zero-crossing condition and its own envelope mean
/// holds less than `sd_threshold` of its energy, or after `max_sifts` passes.
pub fn sift(signal: &[f64], config: &SiftConfig) -> Result<(Vec<f64>, Vec<f64>), HhtError> {
    if signal.len() < 4 {
        return Err(HhtError::NotSiftable);
    }
    let mut mean = envelope_mean(signal).ok_or(HhtError::NotSiftable)?;
    let mut h = signal.to_vec();
    for _ in 0..config.max_sifts.max(1) {
        for (v, m) in h.iter_mut().zip(&mean) {
            *v -= m;
        }
        match envelope_mean(&h) {
            None => break,
            Some(next) => {
                if satisfies_count_condition(&h)
                    && energy_ratio(&next, &h) < config.sd_threshold
                {
                    break;
                }
                mean = next;
            }
        }
    }
    let remainder = signal.iter().zip(&h).map(|(s, v)| s - v).collect();
    Ok((h, remainder))
}

/// Decomposes `signal` into IMFs (fast to slow) and a residual.
pub fn emd(signal: &[f64], config: &SiftConfig) -> ImfSet {
    let mut residual = signal.to_vec();
    let mut imfs = Vec::new();
    while imfs.len() < config.max_imfs {
        let (maxima, minima) = extrema(&residual);
        if maxima.len() + minima.len() < 3 || is_monotone(&residual) {
            break;
        }
        match sift(&residual, config) {
            Ok((imf, rest)) => {
                residual = rest;
                imfs.push(Imf {
                    values: imf,
                    mode_index: imfs.len() + 1,
                });
            }
            Err(_) => break,
        }
    }
    ImfSet { imfs, residual }
}
