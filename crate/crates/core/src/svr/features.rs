//! Sliding-window statistics and the RBF kernel.

use super::SvrError;

/// Mean and population variance of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowFeature {
    pub mean: f64,
    pub variance: f64,
}

impl WindowFeature {
    pub fn of(window: &[f64]) -> Self {
        let n = window.len() as f64;
        let mean = window.iter().sum::<f64>() / n;
        let variance = window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, variance }
    }

    pub fn distance_squared(&self, other: &Self) -> f64 {
        let dm = self.mean - other.mean;
        let dv = self.variance - other.variance;
        dm * dm + dv * dv
    }
}

/// Window features paired with the value that follows each window.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrTrainingSet {
    pub features: Vec<WindowFeature>,
    pub targets: Vec<f64>,
    pub window: usize,
    pub slide: usize,
}

impl SvrTrainingSet {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Number of windows of width `window` moved by `slide` whose following
/// value still lies inside a series of length `len`.
pub fn window_count(len: usize, window: usize, slide: usize) -> usize {
    if slide == 0 || len <= window {
        0
    } else {
        (len - window - 1) / slide + 1
    }
}

/// Window `g` (zero-based) covers `values[g*s .. g*s + l]`; its target is
/// `values[g*s + l]`.
pub fn window_features(values: &[f64], window: usize, slide: usize) -> Result<SvrTrainingSet, SvrError> {
    if window < 2 || slide == 0 {
        return Err(SvrError::InvalidParameter(format!(
            "window size must be at least 2 and slide at least 1 (got l={window}, s={slide})"
        )));
    }
    if values.len() < window + 1 {
        return Err(SvrError::TooShort {
            len: values.len(),
            needed: window + 1,
        });
    }
    let count = window_count(values.len(), window, slide);
    let mut features = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for g in 0..count {
        let start = g * slide;
        features.push(WindowFeature::of(&values[start..start + window]));
        targets.push(values[start + window]);
    }
    Ok(SvrTrainingSet {
        features,
        targets,
        window,
        slide,
    })
}

pub fn rbf_kernel(a: &WindowFeature, b: &WindowFeature, sigma: f64) -> f64 {
    (-a.distance_squared(b) / (2.0 * sigma * sigma)).exp()
}

/// Dense kernel matrix, row-major.
pub fn kernel_matrix(features: &[WindowFeature], sigma: f64) -> Vec<f64> {
    let n = features.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = rbf_kernel(&features[i], &features[j], sigma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Median of all pairwise feature distances; 1.0 when fewer than two
/// features or the median is zero.
pub fn median_distance(features: &[WindowFeature]) -> f64 {
    let n = features.len();
    let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in 0..i {
            d.push(features[i].distance_squared(&features[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let med = if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    };
    if med > 0.0 && med.is_finite() {
        med
    } else {
        1.0
    }
}
