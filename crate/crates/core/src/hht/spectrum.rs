//! Hilbert spectrum and marginal Hilbert spectrum on a uniform frequency grid.

use super::emd::ImfSet;
use super::hilbert::instantaneous_attributes;

/// Uniform frequency bins centred on `k * resolution` for `k = 0..bins`,
/// covering `[0, fs/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub sampling_frequency: f64,
    /// Bin width in Hz.
    pub resolution: f64,
    pub bins: usize,
}

impl FrequencyGrid {
    /// Grid with `fs / p` spacing for snapshots of `p` samples.
    pub fn for_snapshot(sampling_frequency: f64, snapshot_length: usize) -> Self {
        let resolution = sampling_frequency / snapshot_length as f64;
        Self {
            sampling_frequency,
            resolution,
            bins: snapshot_length / 2 + 1,
        }
    }

    pub fn nyquist(&self) -> f64 {
        self.sampling_frequency / 2.0
    }

    /// Bin containing frequency `f` (nearest centre), clamped to the grid.
    pub fn bin_of(&self, f: f64) -> usize {
        ((f / self.resolution).round().max(0.0) as usize).min(self.bins - 1)
    }

    pub fn centre(&self, bin: usize) -> f64 {
        bin as f64 * self.resolution
    }

    /// `bins + 1` edges; the first and last are clipped to `0` and `fs/2`.
    pub fn bin_edges(&self) -> Vec<f64> {
        let mut edges: Vec<f64> = (0..=self.bins)
            .map(|k| (k as f64 - 0.5) * self.resolution)
            .collect();
        edges[0] = 0.0;
        edges[self.bins] = self.nyquist();
        edges
    }
}

/// Time-frequency amplitude distribution of one snapshot.
///
/// Every IMF deposits its instantaneous amplitude into exactly one bin per
/// time sample, so the spectrum is stored as one bin/amplitude track per IMF
/// rather than as a dense bins x samples array.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertSpectrum {
    pub grid: FrequencyGrid,
    pub samples: usize,
    tracks: Vec<Track>,
}

#[derive(Debug, Clone, PartialEq)]
struct Track {
    bins: Vec<u32>,
    amplitude: Vec<f64>,
}

impl HilbertSpectrum {
    /// Amplitude at `(bin, t)`, summed over IMFs.
    pub fn value(&self, bin: usize, t: usize) -> f64 {
        self.tracks
            .iter()
            .filter(|tr| tr.bins[t] as usize == bin)
            .map(|tr| tr.amplitude[t])
            .sum()
    }

    /// Dense `bins x samples` matrix, row-major by bin.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.samples]; self.grid.bins];
        for tr in &self.tracks {
            for (t, (&b, &a)) in tr.bins.iter().zip(&tr.amplitude).enumerate() {
                dense[b as usize][t] += a;
            }
        }
        dense
    }

    /// Total amplitude deposited in `bin` by IMF `imf` (0-based).
    pub fn imf_row_total(&self, imf: usize, bin: usize) -> f64 {
        let tr = &self.tracks[imf];
        tr.bins
            .iter()
            .zip(&tr.amplitude)
            .filter(|(&b, _)| b as usize == bin)
            .map(|(_, a)| a)
            .sum()
    }

    pub fn imf_total(&self, imf: usize) -> f64 {
        self.tracks[imf].amplitude.iter().sum()
    }

    pub fn imf_count(&self) -> usize {
        self.tracks.len()
    }
}

/// Builds the Hilbert spectrum of a decomposed snapshot. The residual is
/// not included.
pub fn hilbert_spectrum(imfs: &ImfSet, grid: FrequencyGrid) -> HilbertSpectrum {
    let tracks = imfs
        .imfs
        .iter()
        .map(|imf| {
            let a = instantaneous_attributes(&imf.values, grid.sampling_frequency);
            Track {
                bins: a.frequency.iter().map(|&f| grid.bin_of(f) as u32).collect(),
                amplitude: a.amplitude,
            }
        })
        .collect();
    HilbertSpectrum {
        grid,
        samples: imfs.len(),
        tracks,
    }
}

/// Amplitude mass per frequency bin (amplitude x seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSpectrum {
    pub grid: FrequencyGrid,
    pub mass: Vec<f64>,
}

impl MarginalSpectrum {
    pub fn bin_edges(&self) -> Vec<f64> {
        self.grid.bin_edges()
    }
}

/// Integrates the Hilbert spectrum over time with the rectangle rule,
/// `dt = 1/fs`.
pub fn marginal_spectrum(hs: &HilbertSpectrum) -> MarginalSpectrum {
    let dt = 1.0 / hs.grid.sampling_frequency;
    let mut mass = vec![0.0; hs.grid.bins];
    for tr in &hs.tracks {
        for (&b, &a) in tr.bins.iter().zip(&tr.amplitude) {
            mass[b as usize] += a * dt;
        }
    }
    MarginalSpectrum {
        grid: hs.grid,
        mass,
    }
}
