use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rul(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rul"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = rul(dir, args);
    assert!(
        out.status.success(),
        "rul {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn err(dir: &Path, args: &[&str]) -> String {
    let out = rul(dir, args);
    assert!(!out.status.success(), "rul {args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

const SMALL_CONFIG: &str = "\
# small network for 512-sample snapshots
cnn_input_length=512
cnn_filters=8
cnn_kernel=32
cnn_stride=16
cnn_hidden=16
learning_rate=1e-3
iterations=200
window=10
";

fn spec(id: &str, length: usize) -> String {
    format!("id={id}\nlength={length}\nsnapshot_length=512\ngrowth=0.08\n")
}

/// Training run failing at unit 58 and a test run observed to unit 40.
fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("train.spec"), spec("train", 58)).unwrap();
    fs::write(d.join("test.spec"), spec("test", 40)).unwrap();
    fs::write(d.join("small.cfg"), SMALL_CONFIG).unwrap();
    ok(d, &["synth", "--spec", "train.spec", "--out", "train", "--seed", "1"]);
    ok(d, &["synth", "--spec", "test.spec", "--out", "test", "--seed", "2"]);
    dir
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn rows(path: &Path) -> usize {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("unit_index"))
        .count()
}

#[test]
fn synth_writes_snapshots_and_manifest() {
    let dir = fixture();
    let files = tree(&dir.path().join("train"));
    assert_eq!(files.len(), 59);
    let manifest = fs::read_to_string(dir.path().join("train/run.manifest")).unwrap();
    assert!(manifest.contains("true_failure_time_s=580"));
}

#[test]
fn synth_is_deterministic() {
    let dir = fixture();
    let d = dir.path();
    ok(d, &["synth", "--spec", "train.spec", "--out", "again", "--seed", "1"]);
    assert_eq!(tree(&d.join("train")), tree(&d.join("again")));
    ok(d, &["synth", "--spec", "train.spec", "--out", "other", "--seed", "9"]);
    assert_ne!(tree(&d.join("train")), tree(&d.join("other")));
}

#[test]
fn synth_rejects_empty_run() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("zero.spec"), "length=0\n").unwrap();
    let e = err(dir.path(), &["synth", "--spec", "zero.spec", "--out", "x"]);
    assert!(e.contains("length") && e.contains("hint:"), "{e}");
    assert!(!dir.path().join("x").exists());
}

#[test]
fn extract_dei_rows_and_frequencies() {
    let dir = fixture();
    let d = dir.path();
    let out = ok(d, &["extract-dei", "--run", "train", "--out", "train.dei"]);
    assert!(out.contains("f_inner 221.66 Hz, f_outer 168.34 Hz, f_ball 215.33 Hz"), "{out}");
    assert_eq!(rows(&d.join("train.dei")), 58);
    assert_eq!(rows(&d.join("train.dei.raw")), 58);
    assert!(fs::read_to_string(d.join("train.dei")).unwrap().contains("normalized=true"));
}

#[test]
fn extract_dei_single_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("one.spec"), "length=1\n").unwrap();
    ok(d, &["synth", "--spec", "one.spec", "--out", "one"]);
    let out = rul(d, &["extract-dei", "--run", "one", "--out", "one.dei"]);
    assert!(out.status.success());
    assert_eq!(rows(&d.join("one.dei.raw")), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn missing_manifest_is_named() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("empty")).unwrap();
    let e = err(dir.path(), &["extract-dei", "--run", "empty", "--out", "x.dei"]);
    assert!(e.contains("run.manifest"), "{e}");
    assert!(e.contains("hint:"));
}

#[test]
fn full_chain_crosses_threshold() {
    let dir = fixture();
    let d = dir.path();
    let c = ["--config", "small.cfg"];
    let with = |args: &[&str]| -> Vec<String> { c.iter().chain(args).map(|s| s.to_string()).collect() };
    let run = |args: &[&str]| {
        let v = with(args);
        ok(d, &v.iter().map(String::as_str).collect::<Vec<_>>())
    };
    run(&["extract-dei", "--run", "train", "--out", "train.dei"]);
    run(&["train-cnn", "--run", "train", "--dei", "train.dei", "--model-out", "cnn.model"]);
    assert!(fs::read_to_string(d.join("cnn.model")).unwrap().starts_with("CNN-DEI v1\n"));
    assert_eq!(fs::read_to_string(d.join("cnn.model.loss.csv")).unwrap().lines().count(), 201);
    run(&["estimate-dei", "--model", "cnn.model", "--run", "train", "--out", "est.dei"]);
    run(&["train-svr", "--dei", "est.dei", "--out", "svr.model"]);
    assert!(fs::read_to_string(d.join("svr.model")).unwrap().starts_with("SVR v1\n"));
    let human = run(&[
        "predict", "--model", "cnn.model", "--svr", "svr.model", "--run", "test",
        "--threshold-from", "est.dei", "--report-out", "rep.csv",
    ]);
    let report = fs::read_to_string(d.join("rep.csv")).unwrap();
    let row: Vec<&str> = report.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "test");
    assert_eq!(row[1], "true", "{report}");
    assert_eq!(row[5], "180");
    assert!(!row[6].is_empty() && !row[7].is_empty());
    assert!(human.contains("Er "));
    let forecast = fs::read_to_string(d.join("rep.csv.forecast.csv")).unwrap();
    assert_eq!(forecast.lines().count(), 2 + row[2].parse::<usize>().unwrap());

    // an explicit remaining life replaces the manifest's
    run(&[
        "predict", "--model", "cnn.model", "--svr", "svr.model", "--run", "test",
        "--threshold-from", "est.dei", "--report-out", "rep2.csv", "--true-rul", "360",
    ]);
    let report = fs::read_to_string(d.join("rep2.csv")).unwrap();
    assert_eq!(report.lines().nth(1).unwrap().split(',').nth(5), Some("360"));

    let e = err(d, &[
        "predict", "--model", "cnn.model", "--svr", "svr.model", "--run", "test",
        "--threshold-from", "absent.dei", "--report-out", "rep3.csv",
    ]);
    assert!(e.contains("absent.dei"), "{e}");
}

#[test]
fn train_cnn_is_deterministic_and_flags_win() {
    let dir = fixture();
    let d = dir.path();
    ok(d, &["--config", "small.cfg", "extract-dei", "--run", "train", "--out", "train.dei"]);
    for name in ["a.model", "b.model"] {
        ok(d, &["--config", "small.cfg", "--seed", "3", "train-cnn", "--run", "train", "--dei", "train.dei", "--model-out", name, "--iters", "7"]);
    }
    assert_eq!(fs::read(d.join("a.model")).unwrap(), fs::read(d.join("b.model")).unwrap());
    // the flag beats the config file's 200 iterations
    assert_eq!(fs::read_to_string(d.join("a.model.loss.csv")).unwrap().lines().count(), 8);
    ok(d, &["--config", "small.cfg", "--seed", "4", "train-cnn", "--run", "train", "--dei", "train.dei", "--model-out", "c.model", "--iters", "7"]);
    assert_ne!(fs::read(d.join("a.model")).unwrap(), fs::read(d.join("c.model")).unwrap());

    let e = err(d, &["--config", "small.cfg", "train-cnn", "--run", "train", "--dei", "nope.dei", "--model-out", "x.model"]);
    assert!(e.contains("nope.dei"));
    // raw values are not valid labels
    let e = err(d, &["--config", "small.cfg", "train-cnn", "--run", "train", "--dei", "train.dei.raw", "--model-out", "x.model"]);
    assert!(e.contains("normalized"), "{e}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = fixture();
    let d = dir.path();
    fs::write(d.join("bad.cfg"), "windw=10\n").unwrap();
    let e = err(d, &["--config", "bad.cfg", "extract-dei", "--run", "train", "--out", "t.dei"]);
    assert!(e.contains("windw"), "{e}");
}

#[test]
fn evaluate_is_reproducible() {
    let dir = fixture();
    let d = dir.path();
    for out in ["eval1", "eval2"] {
        let text = ok(d, &["--config", "small.cfg", "evaluate", "--train", "train", "--test", "test", "--out-dir", out]);
        assert!(text.starts_with("test: predicted RUL"), "{text}");
    }
    let a = tree(&d.join("eval1"));
    assert_eq!(a, tree(&d.join("eval2")));
    let names: Vec<String> = a.iter().map(|(p, _)| p.display().to_string()).collect();
    for f in ["cnn.model", "svr.model", "report.csv", "report.txt", "forecast_test.csv", "loss.csv", "config.txt"] {
        assert!(names.iter().any(|n| n == f), "{f} missing from {names:?}");
    }
}
