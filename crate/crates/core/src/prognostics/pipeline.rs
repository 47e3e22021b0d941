//! The three-stage run: HHT labels, CNN training and estimation, SVR
//! forecasting to the failure threshold.

use std::fmt::Write as _;
use std::time::Instant;

use super::config::{PipelineConfig, SvrSource};
use super::metrics::{eta, failure_threshold, relative_error, rul_from_steps};
use super::{PrognosticsError, Stage, StageError};
use crate::cnn::{estimate_dei, train, CnnModel};
use crate::hht::{dei_series, normalize, DeiSeries};
use crate::ingest::{characteristic_frequencies, BearingRun};
use crate::svr::{forecast_until, train_svr, window_features, ForecastResult, SvrModel};

/// Outcome for one test bearing.
#[derive(Debug, Clone, PartialEq)]
pub struct RulReport {
    pub bearing: String,
    pub steps: usize,
    pub threshold: f64,
    pub crossed: bool,
    /// `U * tau`; absent when the forecast never crossed.
    pub predicted_rul: Option<f64>,
    pub true_rul: Option<f64>,
    /// Present iff both RUL values are.
    pub relative_error: Option<f64>,
    pub eta: Option<f64>,
    pub forecast: ForecastResult,
    /// Estimated DEI of the observed part of the run.
    pub estimated: DeiSeries,
    pub timings: BearingTimings,
}

/// Wall-clock seconds spent on one test bearing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BearingTimings {
    pub estimate_s: f64,
    pub estimate_per_snapshot_s: f64,
    pub svr_s: f64,
    pub forecast_s: f64,
}

/// Wall-clock seconds of the training stages.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub extraction_s: f64,
    pub extraction_per_snapshot_s: f64,
    pub cnn_training_s: f64,
    pub threshold_s: f64,
    pub svr_training_s: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Normalized HHT DEI of the training bearing.
    pub labels: DeiSeries,
    pub cnn: CnnModel,
    pub losses: Vec<f64>,
    /// CNN-estimated DEI of the training bearing.
    pub training_estimate: DeiSeries,
    pub threshold: f64,
    /// Shared forecaster; `None` when every test bearing gets its own.
    pub svr: Option<SvrModel>,
    pub reports: Vec<RulReport>,
    pub timings: StageTimings,
}

fn at(stage: Stage, bearing: &str) -> impl Fn(StageError) -> PrognosticsError + '_ {
    move |source| PrognosticsError::Stage {
        stage,
        bearing: bearing.to_string(),
        source,
    }
}

/// Fits the forecaster on one estimated DEI series.
pub fn fit_forecaster(series: &DeiSeries, config: &PipelineConfig) -> Result<SvrModel, StageError> {
    let set = window_features(&series.values, config.window, config.slide)?;
    Ok(train_svr(&set, &config.svr)?.model)
}

/// Forecasts one estimated series and scores it against the run's known
/// remaining life, if any.
pub fn report_for(
    bearing: &str,
    estimated: DeiSeries,
    model: &SvrModel,
    threshold: f64,
    interval: f64,
    true_rul: Option<f64>,
    cap: usize,
) -> Result<RulReport, PrognosticsError> {
    let t = Instant::now();
    let forecast = forecast_until(model, &estimated.values, threshold, cap)
        .map_err(|e| at(Stage::Forecast, bearing)(e.into()))?;
    let forecast_s = t.elapsed().as_secs_f64();
    let predicted_rul = if forecast.crossed {
        Some(rul_from_steps(forecast.steps, interval)?)
    } else {
        None
    };
    let relative_error = match (true_rul, predicted_rul) {
        (Some(t), Some(p)) => Some(relative_error(t, p)?),
        _ => None,
    };
    Ok(RulReport {
        bearing: bearing.to_string(),
        steps: forecast.steps,
        threshold,
        crossed: forecast.crossed,
        predicted_rul,
        true_rul,
        eta: relative_error.map(eta),
        relative_error,
        forecast,
        estimated,
        timings: BearingTimings {
            forecast_s,
            ..BearingTimings::default()
        },
    })
}

/// Runs every stage on one training bearing and a list of test bearings.
pub fn run_pipeline(
    train_run: &BearingRun,
    test_runs: &[BearingRun],
    config: &PipelineConfig,
) -> Result<PipelineOutput, PrognosticsError> {
    config.validate()?;
    let id = train_run.id.as_str();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let cf = characteristic_frequencies(&train_run.geometry, &train_run.condition)
        .map_err(|e| at(Stage::Extraction, id)(e.into()))?;
    let raw = dei_series(train_run, &cf, &config.hht).map_err(|e| at(Stage::Extraction, id)(e.into()))?;
    let labels = normalize(&raw, config.normalize_eps).map_err(|e| at(Stage::Extraction, id)(e.into()))?;
    timings.extraction_s = t.elapsed().as_secs_f64();
    timings.extraction_per_snapshot_s = timings.extraction_s / train_run.len() as f64;

    let t = Instant::now();
    let outcome = train(train_run, &labels, &config.cnn).map_err(|e| at(Stage::CnnTraining, id)(e.into()))?;
    timings.cnn_training_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let training_estimate =
        estimate_dei(&outcome.model, train_run).map_err(|e| at(Stage::Estimation, id)(e.into()))?;
    let threshold = failure_threshold(&training_estimate)?;
    timings.threshold_s = t.elapsed().as_secs_f64();

    let svr = match config.svr_source {
        SvrSource::TrainingBearing => {
            let t = Instant::now();
            let m = fit_forecaster(&training_estimate, config).map_err(at(Stage::SvrTraining, id))?;
            timings.svr_training_s = t.elapsed().as_secs_f64();
            Some(m)
        }
        SvrSource::TestBearing => None,
    };

    let mut reports = Vec::with_capacity(test_runs.len());
    for run in test_runs {
        let bid = run.id.as_str();
        let t = Instant::now();
        let estimated = estimate_dei(&outcome.model, run).map_err(|e| at(Stage::Estimation, bid)(e.into()))?;
        let estimate_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let own;
        let model = match &svr {
            Some(m) => m,
            None => {
                own = fit_forecaster(&estimated, config).map_err(at(Stage::SvrTraining, bid))?;
                &own
            }
        };
        let svr_s = t.elapsed().as_secs_f64();
        let mut report = report_for(
            bid,
            estimated,
            model,
            threshold,
            run.condition.snapshot_interval,
            run.true_rul(),
            config.forecast_cap,
        )?;
        report.timings.estimate_s = estimate_s;
        report.timings.estimate_per_snapshot_s = estimate_s / run.len() as f64;
        report.timings.svr_s = svr_s;
        reports.push(report);
    }

    Ok(PipelineOutput {
        labels,
        cnn: outcome.model,
        losses: outcome.losses,
        training_estimate,
        threshold,
        svr,
        reports,
        timings,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// One comma-separated row per bearing at full precision; timings are left
/// out so identical runs give identical text.
pub fn render_delimited(reports: &[RulReport]) -> String {
    let mut out = String::from("id,crossed,steps,threshold,predicted_rul_s,true_rul_s,er_percent,eta\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.bearing,
            r.crossed,
            r.steps,
            r.threshold,
            opt(r.predicted_rul),
            opt(r.true_rul),
            opt(r.relative_error),
            opt(r.eta)
        );
    }
    out
}

/// Readable summary, Er to two decimals.
pub fn render_human(reports: &[RulReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = write!(out, "{}: ", r.bearing);
        match r.predicted_rul {
            Some(p) => {
                let _ = write!(out, "predicted RUL {p:.0} s after {} steps (L_ft = {:.4})", r.steps, r.threshold);
            }
            None => {
                let _ = write!(
                    out,
                    "no threshold crossing within {} steps (L_ft = {:.4}); RUL not reported",
                    r.steps, r.threshold
                );
            }
        }
        if let Some(t) = r.true_rul {
            let _ = write!(out, ", true RUL {t:.0} s");
        }
        if let (Some(er), Some(e)) = (r.relative_error, r.eta) {
            let _ = write!(out, ", Er {er:.2}%, ETA {e:.2}");
        }
        out.push('\n');
    }
    out
}

/// Stage timings, one `name seconds` line each.
pub fn render_timings(t: &StageTimings, reports: &[RulReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "hht extraction      {:.3} s ({:.3} ms/snapshot)", t.extraction_s, 1e3 * t.extraction_per_snapshot_s);
    let _ = writeln!(out, "cnn training        {:.3} s", t.cnn_training_s);
    let _ = writeln!(out, "threshold           {:.3} s", t.threshold_s);
    let _ = writeln!(out, "svr training        {:.3} s", t.svr_training_s);
    for r in reports {
        let b = r.timings;
        let _ = writeln!(
            out,
            "{}: estimate {:.3} s ({:.3} ms/snapshot), svr {:.3} s, forecast {:.3} s",
            r.bearing,
            b.estimate_s,
            1e3 * b.estimate_per_snapshot_s,
            b.svr_s,
            b.forecast_s
        );
    }
    out
}
