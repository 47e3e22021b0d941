//! Trained regressor, prediction and recursive forecasting.

use std::collections::VecDeque;
use std::fmt::Write as _;

use super::features::{kernel_matrix, median_distance, rbf_kernel, SvrTrainingSet, WindowFeature};
use super::smo::{solve_dual, DualSolution, SmoConfig};
use super::SvrError;

/// How the RBF width is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelWidth {
    /// Median pairwise distance between training features.
    Median,
    Fixed(f64),
}

impl std::fmt::Display for KernelWidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelWidth::Median => f.write_str("median"),
            KernelWidth::Fixed(s) => write!(f, "{s}"),
        }
    }
}

impl std::str::FromStr for KernelWidth {
    type Err = SvrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("median") {
            return Ok(KernelWidth::Median);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(KernelWidth::Fixed(v)),
            _ => Err(SvrError::InvalidParameter(format!(
                "kernel width must be `median` or a positive number, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub width: KernelWidth,
    pub smo: SmoConfig,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: 5.09,
            epsilon: 0.01,
            width: KernelWidth::Median,
            smo: SmoConfig::default(),
        }
    }
}

/// Support vectors with their coefficients `alpha_hat - alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub support: Vec<WindowFeature>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub sigma: f64,
    pub c: f64,
    pub epsilon: f64,
    pub window: usize,
    pub slide: usize,
}

/// Model together with the full dual solution it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrFit {
    pub model: SvrModel,
    pub dual: DualSolution,
}

pub fn train_svr(set: &SvrTrainingSet, params: &SvrParams) -> Result<SvrFit, SvrError> {
    if set.is_empty() {
        return Err(SvrError::Empty);
    }
    if set.features.len() != set.targets.len() {
        return Err(SvrError::InvalidParameter(format!(
            "{} features for {} targets",
            set.features.len(),
            set.targets.len()
        )));
    }
    let sigma = match params.width {
        KernelWidth::Median => median_distance(&set.features),
        KernelWidth::Fixed(s) if s > 0.0 && s.is_finite() => s,
        KernelWidth::Fixed(s) => {
            return Err(SvrError::InvalidParameter(format!("kernel width must be positive, got {s}")))
        }
    };
    let k = kernel_matrix(&set.features, sigma);
    let dual = solve_dual(&k, &set.targets, params.c, params.epsilon, &params.smo)?;
    let mut support = Vec::new();
    let mut coefficients = Vec::new();
    for (f, b) in set.features.iter().zip(dual.coefficients()) {
        if b != 0.0 {
            support.push(*f);
            coefficients.push(b);
        }
    }
    Ok(SvrFit {
        model: SvrModel {
            support,
            coefficients,
            bias: dual.bias,
            sigma,
            c: params.c,
            epsilon: params.epsilon,
            window: set.window,
            slide: set.slide,
        },
        dual,
    })
}

impl SvrModel {
    /// `sum_g beta_g K(x, x_g) + b`.
    pub fn predict(&self, x: &WindowFeature) -> f64 {
        self.support
            .iter()
            .zip(&self.coefficients)
            .map(|(s, b)| b * rbf_kernel(x, s, self.sigma))
            .sum::<f64>()
            + self.bias
    }

    /// Prediction from the statistics of a raw window.
    pub fn predict_window(&self, window: &[f64]) -> f64 {
        self.predict(&WindowFeature::of(window))
    }
}

/// Predicted continuation of a DEI series.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    /// Predictions for units `Q+1 ..= Q+U`.
    pub predicted: Vec<f64>,
    pub steps: usize,
    pub crossed: bool,
    pub threshold: f64,
}

/// Appends one prediction at a time to a buffer of the last `window`
/// values until a prediction reaches `threshold` or `cap` steps are spent.
pub fn forecast_until(
    model: &SvrModel,
    history: &[f64],
    threshold: f64,
    cap: usize,
) -> Result<ForecastResult, SvrError> {
    let l = model.window;
    if history.len() < l {
        return Err(SvrError::TooShort {
            len: history.len(),
            needed: l,
        });
    }
    if !threshold.is_finite() || cap == 0 {
        return Err(SvrError::InvalidParameter(format!(
            "forecast needs a finite threshold and a positive cap (got {threshold}, {cap})"
        )));
    }
    let mut buffer: VecDeque<f64> = history[history.len() - l..].iter().copied().collect();
    let mut predicted = Vec::new();
    let mut crossed = false;
    while predicted.len() < cap {
        let next = model.predict_window(buffer.make_contiguous());
        predicted.push(next);
        buffer.pop_front();
        buffer.push_back(next);
        if next >= threshold {
            crossed = true;
            break;
        }
    }
    Ok(ForecastResult {
        steps: predicted.len(),
        predicted,
        crossed,
        threshold,
    })
}

/// `step,value` rows, step counted from 1 after the history.
pub fn write_forecast(f: &ForecastResult) -> String {
    let mut out = format!(
        "# forecast threshold={:.16e} crossed={} steps={}\nstep,value\n",
        f.threshold, f.crossed, f.steps
    );
    for (i, v) in f.predicted.iter().enumerate() {
        let _ = writeln!(out, "{},{v:.16e}", i + 1);
    }
    out
}
