//! Versioned text format for trained regressors.
//!
//! ```text
//! SVR v1
//! params c=<f64> epsilon=<f64> sigma=<f64> window=<usize> slide=<usize>
//! bias <f64>
//! support <count>
//! <mean> <variance> <coefficient>
//! ...
//! end
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::features::WindowFeature;
use super::model::SvrModel;
use super::SvrError;

const MAGIC: &str = "SVR v1";

pub fn write_svr(model: &SvrModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(
        out,
        "params c={:.16e} epsilon={:.16e} sigma={:.16e} window={} slide={}",
        model.c, model.epsilon, model.sigma, model.window, model.slide
    );
    let _ = writeln!(out, "bias {:.16e}", model.bias);
    let _ = writeln!(out, "support {}", model.support.len());
    for (x, b) in model.support.iter().zip(&model.coefficients) {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", x.mean, x.variance, b);
    }
    out.push_str("end\n");
    out
}

fn format_err(line: usize, message: impl Into<String>) -> SvrError {
    SvrError::Format {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, what: &str, v: &str) -> Result<T, SvrError> {
    v.parse()
        .map_err(|_| format_err(line, format!("bad {what} value {v:?}")))
}

pub fn read_svr(text: &str) -> Result<SvrModel, SvrError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, MAGIC)) => {}
        other => {
            return Err(SvrError::Version {
                found: other.map(|(_, l)| l.chars().take(40).collect()).unwrap_or_default(),
            })
        }
    }
    let (n, params) = lines.next().ok_or_else(|| format_err(2, "missing params line"))?;
    let rest = params
        .strip_prefix("params ")
        .ok_or_else(|| format_err(n, "expected a params line"))?;
    let (mut c, mut epsilon, mut sigma, mut window, mut slide) = (None, None, None, None, None);
    for field in rest.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| format_err(n, format!("malformed field {field:?}")))?;
        match k {
            "c" => c = Some(num::<f64>(n, k, v)?),
            "epsilon" => epsilon = Some(num::<f64>(n, k, v)?),
            "sigma" => sigma = Some(num::<f64>(n, k, v)?),
            "window" => window = Some(num::<usize>(n, k, v)?),
            "slide" => slide = Some(num::<usize>(n, k, v)?),
            _ => return Err(format_err(n, format!("unknown parameter {k:?}"))),
        }
    }
    let missing = |k: &str| format_err(n, format!("params line is missing {k}"));
    let sigma = sigma.ok_or_else(|| missing("sigma"))?;
    if !(sigma > 0.0) {
        return Err(format_err(n, "sigma must be positive"));
    }
    let window = window.ok_or_else(|| missing("window"))?;
    if window < 2 {
        return Err(format_err(n, "window must be at least 2"));
    }

    let (n, bias_line) = lines.next().ok_or_else(|| format_err(n + 1, "missing bias line"))?;
    let bias = num::<f64>(
        n,
        "bias",
        bias_line
            .strip_prefix("bias ")
            .ok_or_else(|| format_err(n, "expected a bias line"))?,
    )?;
    let (n, count_line) = lines.next().ok_or_else(|| format_err(n + 1, "missing support line"))?;
    let count = num::<usize>(
        n,
        "support",
        count_line
            .strip_prefix("support ")
            .ok_or_else(|| format_err(n, "expected a support line"))?,
    )?;
    let mut support = Vec::with_capacity(count);
    let mut coefficients = Vec::with_capacity(count);
    let mut last = n;
    for _ in 0..count {
        let (n, row) = lines
            .next()
            .ok_or_else(|| format_err(last + 1, format!("expected {count} support vectors")))?;
        last = n;
        let parts: Vec<&str> = row.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(format_err(n, "support rows hold mean, variance and coefficient"));
        }
        support.push(WindowFeature {
            mean: num(n, "mean", parts[0])?,
            variance: num(n, "variance", parts[1])?,
        });
        coefficients.push(num(n, "coefficient", parts[2])?);
    }
    match lines.next() {
        Some((_, "end")) => {}
        Some((n, _)) => return Err(format_err(n, "expected end marker")),
        None => return Err(format_err(last + 1, "missing end marker")),
    }
    Ok(SvrModel {
        support,
        coefficients,
        bias,
        sigma,
        c: c.ok_or_else(|| format_err(2, "params line is missing c"))?,
        epsilon: epsilon.ok_or_else(|| format_err(2, "params line is missing epsilon"))?,
        window,
        slide: slide.ok_or_else(|| format_err(2, "params line is missing slide"))?,
    })
}

pub fn save_svr(model: &SvrModel, path: &Path) -> Result<(), SvrError> {
    std::fs::write(path, write_svr(model)).map_err(|source| SvrError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_svr(path: &Path) -> Result<SvrModel, SvrError> {
    let text = std::fs::read_to_string(path).map_err(|source| SvrError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_svr(&text)
}
