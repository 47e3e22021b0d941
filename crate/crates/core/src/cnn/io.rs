//! Versioned text format for trained networks.
//!
//! ```text
//! CNN-DEI v1
//! geometry input_length=2560 conv1=64,100,50 pool1=2,2 conv2=64,2,1 pool2=2,2 hidden=100
//! scaling mean=<f64> std=<f64>
//! tensor conv1.weights 6400
//! <one value per line>
//! ...
//! end
//! ```
//!
//! Values carry 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::path::Path;

use super::model::{CnnGeometry, CnnModel, InputScaling, TENSOR_NAMES};
use super::tensor::{ConvShape, PoolShape};
use super::CnnError;

const MAGIC: &str = "CNN-DEI v1";

pub fn write_model(model: &CnnModel) -> String {
    let g = &model.geometry;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(
        out,
        "geometry input_length={} conv1={},{},{} pool1={},{} conv2={},{},{} pool2={},{} hidden={}",
        g.input_length,
        g.conv1.out_channels,
        g.conv1.kernel,
        g.conv1.stride,
        g.pool1.size,
        g.pool1.stride,
        g.conv2.out_channels,
        g.conv2.kernel,
        g.conv2.stride,
        g.pool2.size,
        g.pool2.stride,
        g.hidden
    );
    let _ = writeln!(
        out,
        "scaling mean={:.16e} std={:.16e}",
        model.scaling.mean, model.scaling.std
    );
    for (i, name) in TENSOR_NAMES.iter().enumerate() {
        let t = model.tensor(i);
        let _ = writeln!(out, "tensor {name} {}", t.len());
        for v in t {
            let _ = writeln!(out, "{v:.16e}");
        }
    }
    out.push_str("end\n");
    out
}

fn header(line: usize, message: impl Into<String>) -> CnnError {
    CnnError::Header {
        line,
        message: message.into(),
    }
}

fn parse_triple(line: usize, v: &str) -> Result<Vec<usize>, CnnError> {
    v.split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| header(line, format!("malformed size list {v:?}")))
}

fn parse_geometry(line_no: usize, line: &str) -> Result<CnnGeometry, CnnError> {
    let rest = line
        .strip_prefix("geometry ")
        .ok_or_else(|| header(line_no, "expected a geometry line"))?;
    let mut input_length = None;
    let mut conv1 = None;
    let mut pool1 = None;
    let mut conv2 = None;
    let mut pool2 = None;
    let mut hidden = None;
    for field in rest.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| header(line_no, format!("malformed field {field:?}")))?;
        let nums = parse_triple(line_no, v)?;
        let want = |n: usize| -> Result<(), CnnError> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(header(line_no, format!("{k} needs {n} values")))
            }
        };
        match k {
            "input_length" => {
                want(1)?;
                input_length = Some(nums[0]);
            }
            "hidden" => {
                want(1)?;
                hidden = Some(nums[0]);
            }
            "conv1" | "conv2" => {
                want(3)?;
                let c = (nums[0], nums[1], nums[2]);
                if k == "conv1" {
                    conv1 = Some(c);
                } else {
                    conv2 = Some(c);
                }
            }
            "pool1" | "pool2" => {
                want(2)?;
                let p = PoolShape {
                    size: nums[0],
                    stride: nums[1],
                };
                if k == "pool1" {
                    pool1 = Some(p);
                } else {
                    pool2 = Some(p);
                }
            }
            _ => return Err(header(line_no, format!("unknown geometry field {k:?}"))),
        }
    }
    let missing = |f: &str| header(line_no, format!("geometry is missing {f}"));
    let (f1, k1, s1) = conv1.ok_or_else(|| missing("conv1"))?;
    let (f2, k2, s2) = conv2.ok_or_else(|| missing("conv2"))?;
    let g = CnnGeometry {
        input_length: input_length.ok_or_else(|| missing("input_length"))?,
        conv1: ConvShape {
            kernel: k1,
            in_channels: 1,
            out_channels: f1,
            stride: s1,
        },
        pool1: pool1.ok_or_else(|| missing("pool1"))?,
        conv2: ConvShape {
            kernel: k2,
            in_channels: f1,
            out_channels: f2,
            stride: s2,
        },
        pool2: pool2.ok_or_else(|| missing("pool2"))?,
        hidden: hidden.ok_or_else(|| missing("hidden"))?,
    };
    g.shapes()
        .map_err(|e| header(line_no, format!("inconsistent geometry: {e}")))?;
    Ok(g)
}

fn parse_scaling(line_no: usize, line: &str) -> Result<InputScaling, CnnError> {
    let rest = line
        .strip_prefix("scaling ")
        .ok_or_else(|| header(line_no, "expected a scaling line"))?;
    let mut mean = None;
    let mut std = None;
    for field in rest.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| header(line_no, format!("malformed field {field:?}")))?;
        let x: f64 = v
            .parse()
            .map_err(|_| header(line_no, format!("bad number {v:?}")))?;
        match k {
            "mean" => mean = Some(x),
            "std" => std = Some(x),
            _ => return Err(header(line_no, format!("unknown scaling field {k:?}"))),
        }
    }
    let std = std.ok_or_else(|| header(line_no, "scaling is missing std"))?;
    if !(std > 0.0) {
        return Err(header(line_no, "scaling std must be positive"));
    }
    Ok(InputScaling {
        mean: mean.ok_or_else(|| header(line_no, "scaling is missing mean"))?,
        std,
    })
}

pub fn read_model(text: &str) -> Result<CnnModel, CnnError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, magic) = lines.next().ok_or_else(|| CnnError::Version {
        found: String::new(),
    })?;
    if magic != MAGIC {
        return Err(CnnError::Version {
            found: magic.chars().take(40).collect(),
        });
    }
    let (n, geo) = lines.next().ok_or_else(|| header(2, "missing geometry line"))?;
    let geometry = parse_geometry(n, geo)?;
    let (n, sc) = lines.next().ok_or_else(|| header(3, "missing scaling line"))?;
    let scaling = parse_scaling(n, sc)?;

    let mut model = CnnModel::zeroed(geometry)?;
    model.scaling = scaling;
    for (t, name) in TENSOR_NAMES.iter().enumerate() {
        let truncated = || CnnError::Truncated {
            tensor: name.to_string(),
        };
        let (n, head) = lines.next().ok_or_else(truncated)?;
        let mut parts = head.split_whitespace();
        if parts.next() != Some("tensor") || parts.next() != Some(*name) {
            return Err(header(n, format!("expected tensor {name}")));
        }
        let count: usize = parts
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| header(n, format!("tensor {name} has no element count")))?;
        let dst = model.tensor_mut(t);
        if count != dst.len() {
            return Err(header(
                n,
                format!("tensor {name} holds {count} values but the geometry needs {}", dst.len()),
            ));
        }
        for slot in dst.iter_mut() {
            let (n, v) = lines.next().ok_or_else(truncated)?;
            if v.starts_with("tensor") || v == "end" {
                return Err(truncated());
            }
            *slot = v.parse().map_err(|_| CnnError::Format {
                line: n,
                message: format!("bad value {v:?} in tensor {name}"),
            })?;
        }
    }
    match lines.next() {
        Some((_, "end")) => Ok(model),
        Some((n, other)) => Err(CnnError::Format {
            line: n,
            message: format!("expected end marker, found {:?}", other.chars().take(40).collect::<String>()),
        }),
        None => Err(CnnError::Truncated {
            tensor: "end".into(),
        }),
    }
}

pub fn save_model(model: &CnnModel, path: &Path) -> Result<(), CnnError> {
    std::fs::write(path, write_model(model)).map_err(|source| CnnError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<CnnModel, CnnError> {
    let text = std::fs::read_to_string(path).map_err(|source| CnnError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_model(&text)
}
