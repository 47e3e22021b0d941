//! `rul`: batch front end for DEI extraction, CNN training, SVR forecasting
//! and RUL evaluation.

use std::error::Error;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use rul_core::cnn::{estimate_dei, load_model, save_model, train, write_loss_log};
use rul_core::hht::{dei_series, normalize, read_dei, write_dei, DeiSeries, HhtError};
use rul_core::ingest::{
    characteristic_frequencies, synthesize_run, write_run, BearingRun, RunManifest, SynthSpec,
    MANIFEST_FILE,
};
use rul_core::kv::KvMap;
use rul_core::prognostics::{
    failure_threshold, fit_forecaster, render_delimited, render_human, render_timings,
    report_for, run_pipeline, PipelineConfig, RulReport, CONFIG_KEYS,
};
use rul_core::svr::{load_svr, save_svr, write_forecast};

#[derive(Parser)]
#[command(name = "rul", version, about = "Remaining-useful-life prognostics for rolling bearings")]
struct Cli {
    /// Pipeline settings as key=value lines; flags override them.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for synthesis and network initialization.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-snapshot stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Directory of numbered snapshot files.
    #[arg(long, value_name = "DIR")]
    run: PathBuf,
    /// Run manifest (default: `<run>/run.manifest`).
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic degrading run plus its manifest.
    Synth {
        /// Synthesis spec as key=value lines (default profile when absent).
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Compute the HHT degradation indicator of every snapshot.
    ExtractDei {
        #[command(flatten)]
        input: RunArgs,
        /// Normalized series.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Raw series (default: `<out>.raw`).
        #[arg(long, value_name = "FILE")]
        raw_out: Option<PathBuf>,
    },
    /// Train the CNN on a run and its normalized DEI labels.
    TrainCnn {
        #[command(flatten)]
        input: RunArgs,
        #[arg(long, value_name = "FILE")]
        dei: PathBuf,
        #[arg(long, value_name = "FILE")]
        model_out: PathBuf,
        /// Loss per iteration (default: `<model-out>.loss.csv`).
        #[arg(long, value_name = "FILE")]
        loss_out: Option<PathBuf>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
    },
    /// Estimate the DEI of a run with a trained CNN.
    EstimateDei {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[command(flatten)]
        input: RunArgs,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Fit the SVR forecaster on a DEI series.
    TrainSvr {
        #[arg(long, value_name = "FILE")]
        dei: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        slide: Option<usize>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// `median` or a positive number.
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Estimate, forecast and report the RUL of one test run.
    #[command(group(ArgGroup::new("threshold_source").required(true).args(["threshold_from", "threshold"])))]
    Predict {
        /// Trained CNN.
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Trained SVR forecaster.
        #[arg(long, value_name = "FILE")]
        svr: PathBuf,
        #[command(flatten)]
        input: RunArgs,
        /// DEI file whose last value is the failure threshold.
        #[arg(long, value_name = "FILE")]
        threshold_from: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_name = "FILE")]
        report_out: PathBuf,
        /// Forecast trajectory (default: `<report-out>.forecast.csv`).
        #[arg(long, value_name = "FILE")]
        forecast_out: Option<PathBuf>,
        /// Known remaining life in seconds; overrides the manifest.
        #[arg(long)]
        true_rul: Option<f64>,
    },
    /// Run the whole pipeline on one training run and several test runs.
    Evaluate {
        #[arg(long, value_name = "DIR")]
        train: PathBuf,
        #[arg(long = "test", value_name = "DIR", required = true)]
        tests: Vec<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
    },
}

/// An error with the step that failed and a suggested remedy.
struct Failure {
    what: String,
    hint: &'static str,
    source: Box<dyn Error>,
}

type Outcome<T> = Result<T, Failure>;

trait Context<T> {
    fn ctx(self, what: impl Into<String>, hint: &'static str) -> Outcome<T>;
}

impl<T, E: Error + 'static> Context<T> for Result<T, E> {
    fn ctx(self, what: impl Into<String>, hint: &'static str) -> Outcome<T> {
        self.map_err(|e| Failure {
            what: what.into(),
            hint,
            source: Box::new(e),
        })
    }
}

fn fail(what: impl Into<String>, hint: &'static str, message: impl Into<String>) -> Failure {
    Failure {
        what: what.into(),
        hint,
        source: message.into().into(),
    }
}

const HINT_PATH: &str = "check that the path exists and is readable";
const HINT_WRITE: &str = "check that the output location is writable";
const HINT_CONFIG: &str = "fix the configuration value or remove it to use the default";
const HINT_FORMAT: &str = "regenerate the file with the matching `rul` command";

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.what, f.source);
            eprintln!("hint: {}", f.hint);
            ExitCode::FAILURE
        }
    }
}

/// Config file entries with flag overrides applied.
fn pipeline_config(cli: &Cli, overrides: &[(&str, Option<String>)]) -> Outcome<PipelineConfig> {
    let mut kv = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).ctx(format!("reading config {}", path.display()), HINT_PATH)?;
            let kv = KvMap::parse(&text).ctx(format!("parsing config {}", path.display()), HINT_CONFIG)?;
            kv.check_keys(CONFIG_KEYS)
                .ctx(format!("parsing config {}", path.display()), HINT_CONFIG)?;
            kv
        }
        None => KvMap::default(),
    };
    if let Some(seed) = cli.seed {
        kv.insert("cnn_seed", seed);
    }
    for (key, value) in overrides {
        if let Some(v) = value {
            kv.insert(key, v);
        }
    }
    let config = PipelineConfig::from_kv(&kv).ctx("resolving configuration", HINT_CONFIG)?;
    if cli.verbose {
        eprint!("effective configuration:\n{}", config.to_kv().render());
    }
    Ok(config)
}

fn load_input(input: &RunArgs) -> Outcome<BearingRun> {
    let manifest = input
        .manifest
        .clone()
        .unwrap_or_else(|| input.run.join(MANIFEST_FILE));
    let m = RunManifest::read(&manifest).ctx(
        format!("reading manifest {}", manifest.display()),
        "pass --manifest or write one with `rul synth`",
    )?;
    let m = RunManifest {
        directory: input.run.clone(),
        ..m
    };
    m.load()
        .ctx(format!("loading run {} from {}", m.id, input.run.display()), HINT_PATH)
}

fn read_text(path: &Path, what: &str) -> Outcome<String> {
    fs::read_to_string(path).ctx(format!("reading {what} {}", path.display()), HINT_PATH)
}

fn write_text(path: &Path, text: &str) -> Outcome<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).ctx(format!("creating {}", dir.display()), HINT_WRITE)?;
    }
    fs::write(path, text).ctx(format!("writing {}", path.display()), HINT_WRITE)
}

fn read_series(path: &Path, what: &str) -> Outcome<DeiSeries> {
    let text = read_text(path, what)?;
    read_dei(&text).ctx(format!("parsing {what} {}", path.display()), HINT_FORMAT)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn execute(cli: &Cli) -> Outcome<()> {
    match &cli.command {
        Command::Synth { spec, out } => {
            let spec = match spec {
                Some(p) => SynthSpec::parse(&read_text(p, "synthesis spec")?)
                    .ctx(format!("parsing synthesis spec {}", p.display()), "fix the spec; see `SynthSpec` keys in the README")?,
                None => SynthSpec::default(),
            };
            let run = synthesize_run(&spec, cli.seed.unwrap_or(0))
                .ctx(format!("synthesizing run {}", spec.id), "fix the spec; run length must be at least 1")?;
            write_run(&run, out).ctx(format!("writing run {} to {}", run.id, out.display()), HINT_WRITE)?;
            match run.true_failure_time {
                Some(t) => println!("{}: {} snapshots, failure at {t} s", run.id, run.len()),
                None => println!("{}: {} snapshots, no failure within the profile", run.id, run.len()),
            }
        }
        Command::ExtractDei { input, out, raw_out } => {
            let config = pipeline_config(cli, &[])?;
            let run = load_input(input)?;
            let cf = characteristic_frequencies(&run.geometry, &run.condition)
                .ctx(format!("bearing {}: characteristic frequencies", run.id), "check the manifest geometry")?;
            println!(
                "{}: f_inner {:.2} Hz, f_outer {:.2} Hz, f_ball {:.2} Hz",
                run.id, cf.f_inner, cf.f_outer, cf.f_ball
            );
            let t = Instant::now();
            let raw = dei_series(&run, &cf, &config.hht)
                .ctx(format!("bearing {}: DEI extraction", run.id), "inspect the named snapshot for flat or corrupt data")?;
            if cli.verbose {
                eprintln!("extracted {} values in {:.2} s", raw.len(), t.elapsed().as_secs_f64());
            }
            write_text(&raw_out.clone().unwrap_or_else(|| with_suffix(out, ".raw")), &write_dei(&raw))?;
            match normalize(&raw, config.normalize_eps) {
                Ok(normalized) => write_text(out, &write_dei(&normalized))?,
                Err(HhtError::DegenerateRange) => eprintln!(
                    "warning: bearing {}: the DEI is constant over {} snapshot(s), so no normalized series was written",
                    run.id,
                    raw.len()
                ),
                Err(e) => return Err(e).ctx(format!("bearing {}: DEI normalization", run.id), HINT_CONFIG),
            }
        }
        Command::TrainCnn {
            input,
            dei,
            model_out,
            loss_out,
            lr,
            iters,
            batch_size,
        } => {
            let config = pipeline_config(
                cli,
                &[
                    ("learning_rate", lr.map(|v| v.to_string())),
                    ("iterations", iters.map(|v| v.to_string())),
                    ("batch_size", batch_size.map(|v| v.to_string())),
                ],
            )?;
            let run = load_input(input)?;
            let labels = read_series(dei, "DEI labels")?;
            let t = Instant::now();
            let outcome = train(&run, &labels, &config.cnn)
                .ctx(format!("bearing {}: CNN training", run.id), "labels must be the normalized output of `rul extract-dei` for this run")?;
            if cli.verbose {
                eprintln!(
                    "trained {} iterations in {:.1} s, loss {:.6e} -> {:.6e}",
                    outcome.losses.len(),
                    t.elapsed().as_secs_f64(),
                    outcome.losses[0],
                    outcome.losses[outcome.losses.len() - 1]
                );
            }
            save_model(&outcome.model, model_out).ctx(format!("writing {}", model_out.display()), HINT_WRITE)?;
            let loss_path = loss_out.clone().unwrap_or_else(|| with_suffix(model_out, ".loss.csv"));
            write_text(&loss_path, &write_loss_log(&outcome.losses))?;
        }
        Command::EstimateDei { model, input, out } => {
            let cnn = load_model(model).ctx(format!("loading CNN {}", model.display()), HINT_FORMAT)?;
            let run = load_input(input)?;
            let est = estimate_dei(&cnn, &run)
                .ctx(format!("bearing {}: DEI estimation", run.id), "the model input length must match the snapshot length")?;
            write_text(out, &write_dei(&est))?;
        }
        Command::TrainSvr {
            dei,
            out,
            window,
            slide,
            c,
            epsilon,
            sigma,
        } => {
            let config = pipeline_config(
                cli,
                &[
                    ("window", window.map(|v| v.to_string())),
                    ("slide", slide.map(|v| v.to_string())),
                    ("c", c.map(|v| v.to_string())),
                    ("epsilon", epsilon.map(|v| v.to_string())),
                    ("sigma", sigma.clone()),
                ],
            )?;
            let series = read_series(dei, "DEI series")?;
            let model = fit_forecaster(&series, &config)
                .ctx(format!("SVR training on {}", dei.display()), "the series needs more values than the window size")?;
            if cli.verbose {
                eprintln!("{} support vectors, sigma {}", model.support.len(), model.sigma);
            }
            save_svr(&model, out).ctx(format!("writing {}", out.display()), HINT_WRITE)?;
        }
        Command::Predict {
            model,
            svr,
            input,
            threshold_from,
            threshold,
            report_out,
            forecast_out,
            true_rul,
        } => {
            let config = pipeline_config(cli, &[])?;
            let cnn = load_model(model).ctx(format!("loading CNN {}", model.display()), HINT_FORMAT)?;
            let svr_model = load_svr(svr).ctx(format!("loading SVR {}", svr.display()), HINT_FORMAT)?;
            let l_ft = match (threshold_from, threshold) {
                (Some(p), _) => failure_threshold(&read_series(p, "threshold source")?)
                    .ctx(format!("threshold from {}", p.display()), "use the estimated DEI of the training run")?,
                (None, Some(v)) if v.is_finite() => *v,
                _ => return Err(fail("threshold", HINT_CONFIG, "threshold must be a finite number")),
            };
            let run = load_input(input)?;
            let est = estimate_dei(&cnn, &run)
                .ctx(format!("bearing {}: DEI estimation", run.id), "the model input length must match the snapshot length")?;
            let report = report_for(
                &run.id,
                est,
                &svr_model,
                l_ft,
                run.condition.snapshot_interval,
                true_rul.or(run.true_rul()),
                config.forecast_cap,
            )
            .ctx(format!("bearing {}: forecast", run.id), "the run needs at least as many snapshots as the SVR window")?;
            write_text(report_out, &render_delimited(std::slice::from_ref(&report)))?;
            let fpath = forecast_out.clone().unwrap_or_else(|| with_suffix(report_out, ".forecast.csv"));
            write_text(&fpath, &write_forecast(&report.forecast))?;
            print!("{}", render_human(&[report]));
        }
        Command::Evaluate {
            train: train_dir,
            tests,
            out_dir,
            lr,
            iters,
        } => {
            let config = pipeline_config(
                cli,
                &[
                    ("learning_rate", lr.map(|v| v.to_string())),
                    ("iterations", iters.map(|v| v.to_string())),
                ],
            )?;
            let train_run = load_input(&RunArgs {
                run: train_dir.clone(),
                manifest: None,
            })?;
            let test_runs = tests
                .iter()
                .map(|d| {
                    load_input(&RunArgs {
                        run: d.clone(),
                        manifest: None,
                    })
                })
                .collect::<Outcome<Vec<_>>>()?;
            let out = run_pipeline(&train_run, &test_runs, &config)
                .ctx("pipeline", "see the stage and bearing named above; `--verbose` prints the configuration in use")?;
            write_evaluation(out_dir, &config, &out.reports, &out)?;
            print!("{}", render_human(&out.reports));
            if cli.verbose {
                eprint!("{}", render_timings(&out.timings, &out.reports));
            }
        }
    }
    Ok(())
}

fn write_evaluation(
    dir: &Path,
    config: &PipelineConfig,
    reports: &[RulReport],
    out: &rul_core::prognostics::PipelineOutput,
) -> Outcome<()> {
    write_text(&dir.join("config.txt"), &config.to_kv().render())?;
    write_text(&dir.join("labels.dei"), &write_dei(&out.labels))?;
    let cnn_path = dir.join("cnn.model");
    save_model(&out.cnn, &cnn_path).ctx(format!("writing {}", cnn_path.display()), HINT_WRITE)?;
    write_text(&dir.join("loss.csv"), &write_loss_log(&out.losses))?;
    write_text(&dir.join("train_estimate.dei"), &write_dei(&out.training_estimate))?;
    if let Some(svr) = &out.svr {
        let p = dir.join("svr.model");
        save_svr(svr, &p).ctx(format!("writing {}", p.display()), HINT_WRITE)?;
    }
    for r in reports {
        write_text(&dir.join(format!("forecast_{}.csv", r.bearing)), &write_forecast(&r.forecast))?;
        write_text(&dir.join(format!("estimate_{}.dei", r.bearing)), &write_dei(&r.estimated))?;
    }
    write_text(&dir.join("report.csv"), &render_delimited(reports))?;
    let mut text = render_human(reports);
    let _ = writeln!(text, "failure threshold {}", out.threshold);
    write_text(&dir.join("report.txt"), &text)
}
