//! Network geometry, parameters, forward pass and analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tensor::{
    conv_forward, dense_forward, maxpool_forward, relu_in_place, sigmoid, Array3, ConvLayer,
    ConvShape, PoolShape,
};
use super::CnnError;

/// Layer sizes of the conv-pool-conv-pool-dense-dense network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnnGeometry {
    pub input_length: usize,
    pub conv1: ConvShape,
    pub pool1: PoolShape,
    pub conv2: ConvShape,
    pub pool2: PoolShape,
    pub hidden: usize,
}

/// `[1, length, channels]` of every stage plus the dense widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeChain {
    pub input: [usize; 3],
    pub conv1: [usize; 3],
    pub pool1: [usize; 3],
    pub conv2: [usize; 3],
    pub pool2: [usize; 3],
    pub flatten: usize,
    pub hidden: usize,
    pub output: usize,
}

impl ShapeChain {
    /// Stage sizes rendered as `1x2560x1`, ..., `768`, `100`, `1`.
    pub fn rows(&self) -> Vec<String> {
        let d = |s: [usize; 3]| format!("{}x{}x{}", s[0], s[1], s[2]);
        vec![
            d(self.input),
            d(self.conv1),
            d(self.pool1),
            d(self.conv2),
            d(self.pool2),
            self.flatten.to_string(),
            self.hidden.to_string(),
            self.output.to_string(),
        ]
    }
}

impl CnnGeometry {
    /// 2560-sample input, 64 filters of width 100 / stride 50, 2x2 pooling,
    /// 64 filters of width 2, 2x2 pooling, 100 hidden units.
    pub fn canonical() -> Self {
        Self::with_sizes(2560, 64, 100, 50, 100)
    }

    /// Small variant used for gradient checks: 64 samples, 4 filters.
    pub fn reduced() -> Self {
        Self::with_sizes(64, 4, 8, 4, 10)
    }

    /// Same layer pattern with custom sizes; the second convolution is
    /// always width 2, stride 1, and both pools are 2x2.
    pub fn with_sizes(
        input_length: usize,
        filters: usize,
        kernel: usize,
        stride: usize,
        hidden: usize,
    ) -> Self {
        Self {
            input_length,
            conv1: ConvShape {
                kernel,
                in_channels: 1,
                out_channels: filters,
                stride,
            },
            pool1: PoolShape { size: 2, stride: 2 },
            conv2: ConvShape {
                kernel: 2,
                in_channels: filters,
                out_channels: filters,
                stride: 1,
            },
            pool2: PoolShape { size: 2, stride: 2 },
            hidden,
        }
    }

    pub fn shapes(&self) -> Result<ShapeChain, CnnError> {
        if self.conv1.in_channels != 1 || self.conv2.in_channels != self.conv1.out_channels {
            return Err(CnnError::Dimension {
                what: "channel chain",
                expected: self.conv1.out_channels,
                found: self.conv2.in_channels,
            });
        }
        if self.hidden == 0 || self.conv1.out_channels == 0 || self.conv2.out_channels == 0 {
            return Err(CnnError::Dimension {
                what: "layer width",
                expected: 1,
                found: 0,
            });
        }
        let c1 = self.conv1.output_length(self.input_length)?;
        let p1 = self.pool1.output_length(c1)?;
        let c2 = self.conv2.output_length(p1)?;
        let p2 = self.pool2.output_length(c2)?;
        let f1 = self.conv1.out_channels;
        let f2 = self.conv2.out_channels;
        Ok(ShapeChain {
            input: [1, self.input_length, 1],
            conv1: [1, c1, f1],
            pool1: [1, p1, f1],
            conv2: [1, c2, f2],
            pool2: [1, p2, f2],
            flatten: p2 * f2,
            hidden: self.hidden,
            output: 1,
        })
    }

    /// Element counts of the eight parameter tensors, in [`TENSOR_NAMES`]
    /// order.
    pub fn tensor_sizes(&self) -> Result<[usize; 8], CnnError> {
        let s = self.shapes()?;
        Ok([
            self.conv1.weight_count(),
            self.conv1.out_channels,
            self.conv2.weight_count(),
            self.conv2.out_channels,
            s.flatten * self.hidden,
            self.hidden,
            self.hidden,
            1,
        ])
    }
}

pub const TENSOR_NAMES: [&str; 8] = [
    "conv1.weights",
    "conv1.bias",
    "conv2.weights",
    "conv2.bias",
    "fc1.weights",
    "fc1.bias",
    "out.weights",
    "out.bias",
];

/// Global standardization applied to raw samples before the first layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputScaling {
    pub mean: f64,
    pub std: f64,
}

impl InputScaling {
    pub const IDENTITY: Self = Self { mean: 0.0, std: 1.0 };

    /// Mean and population standard deviation over every sample of every
    /// snapshot; a zero spread maps to unit std.
    pub fn fit<'a>(snapshots: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
        let all: Vec<&[f64]> = snapshots.into_iter().collect();
        for s in &all {
            n += s.len();
            sum += s.iter().sum::<f64>();
        }
        if n == 0 {
            return Self::IDENTITY;
        }
        let mean = sum / n as f64;
        for s in &all {
            sq += s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        }
        let std = (sq / n as f64).sqrt();
        Self {
            mean,
            std: if std > 0.0 { std } else { 1.0 },
        }
    }
}

/// Parameters of the network as one flat vector with per-tensor offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub geometry: CnnGeometry,
    pub scaling: InputScaling,
    params: Vec<f64>,
    offsets: [usize; 9],
}

impl CnnModel {
    /// All parameters zero, identity input scaling.
    pub fn zeroed(geometry: CnnGeometry) -> Result<Self, CnnError> {
        let sizes = geometry.tensor_sizes()?;
        let mut offsets = [0usize; 9];
        for (i, s) in sizes.iter().enumerate() {
            offsets[i + 1] = offsets[i] + s;
        }
        Ok(Self {
            geometry,
            scaling: InputScaling::IDENTITY,
            params: vec![0.0; offsets[8]],
            offsets,
        })
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn initialized(geometry: CnnGeometry, seed: u64) -> Result<Self, CnnError> {
        let mut m = Self::zeroed(geometry)?;
        let flat = geometry.shapes()?.flatten;
        let g = geometry;
        let fans = [
            (0, g.conv1.kernel * g.conv1.in_channels, g.conv1.kernel * g.conv1.out_channels),
            (2, g.conv2.kernel * g.conv2.in_channels, g.conv2.kernel * g.conv2.out_channels),
            (4, flat, g.hidden),
            (6, g.hidden, 1),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (t, fan_in, fan_out) in fans {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in m.tensor_mut(t) {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(m)
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Tensor `i` in [`TENSOR_NAMES`] order.
    pub fn tensor(&self, i: usize) -> &[f64] {
        &self.params[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn tensor_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.params[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Range of tensor `i` inside the flat parameter vector.
    pub fn tensor_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn conv1(&self) -> ConvLayer<'_> {
        ConvLayer {
            shape: self.geometry.conv1,
            weights: self.tensor(0),
            bias: self.tensor(1),
        }
    }

    pub fn conv2(&self) -> ConvLayer<'_> {
        ConvLayer {
            shape: self.geometry.conv2,
            weights: self.tensor(2),
            bias: self.tensor(3),
        }
    }

    /// Network output in `(0, 1)` for one raw snapshot.
    pub fn forward(&self, snapshot: &[f64]) -> Result<f64, CnnError> {
        Ok(self.activations(snapshot)?.output)
    }

    /// Forward pass keeping every intermediate stage.
    pub fn activations(&self, snapshot: &[f64]) -> Result<Activations, CnnError> {
        if snapshot.len() != self.geometry.input_length {
            return Err(CnnError::Dimension {
                what: "snapshot length",
                expected: self.geometry.input_length,
                found: snapshot.len(),
            });
        }
        let InputScaling { mean, std } = self.scaling;
        let input = Array3::column(&snapshot.iter().map(|v| (v - mean) / std).collect::<Vec<_>>());
        let mut conv1 = conv_forward(&self.conv1(), &input)?;
        relu_in_place(&mut conv1.data);
        let (pool1, pool1_argmax) = maxpool_forward(&conv1, self.geometry.pool1)?;
        let mut conv2 = conv_forward(&self.conv2(), &pool1)?;
        relu_in_place(&mut conv2.data);
        let (pool2, pool2_argmax) = maxpool_forward(&conv2, self.geometry.pool2)?;
        let mut hidden = dense_forward(&pool2.data, self.tensor(4), self.tensor(5));
        relu_in_place(&mut hidden);
        let logit = dense_forward(&hidden, self.tensor(6), self.tensor(7))[0];
        Ok(Activations {
            input,
            conv1,
            pool1,
            pool1_argmax,
            conv2,
            pool2,
            pool2_argmax,
            hidden,
            logit,
            output: sigmoid(logit),
        })
    }

    /// Adds the gradient of `d_output * output` with respect to every
    /// parameter into `grads` (flat, same layout as the parameters).
    fn accumulate_gradient(&self, act: &Activations, d_output: f64, grads: &mut [f64]) {
        let g = &self.geometry;
        let y = act.output;
        let dz = d_output * y * (1.0 - y);
        let hidden = g.hidden;
        let (r_ow, r_ob) = (self.tensor_range(6), self.tensor_range(7));
        let (r_fw, r_fb) = (self.tensor_range(4), self.tensor_range(5));

        for (gw, h) in grads[r_ow].iter_mut().zip(&act.hidden) {
            *gw += dz * h;
        }
        grads[r_ob.start] += dz;

        let dh: Vec<f64> = act
            .hidden
            .iter()
            .zip(self.tensor(6))
            .map(|(&h, &w)| if h > 0.0 { dz * w } else { 0.0 })
            .collect();
        let fc1_w = self.tensor(4);
        let mut d_flat = vec![0.0; act.pool2.data.len()];
        {
            let gw = &mut grads[r_fw];
            for (i, &x) in act.pool2.data.iter().enumerate() {
                let row = &mut gw[i * hidden..(i + 1) * hidden];
                for (gv, d) in row.iter_mut().zip(&dh) {
                    *gv += x * d;
                }
                d_flat[i] = fc1_w[i * hidden..(i + 1) * hidden]
                    .iter()
                    .zip(&dh)
                    .map(|(w, d)| w * d)
                    .sum();
            }
        }
        for (gb, d) in grads[r_fb].iter_mut().zip(&dh) {
            *gb += d;
        }

        let mut d_conv2 = unpool(&d_flat, &act.pool2_argmax, &act.conv2);
        let d_pool1 =
            conv_backward(self.conv2(), &act.pool1, &mut d_conv2, grads, self.tensor_range(2), self.tensor_range(3), true);
        let mut d_conv1 = unpool(&d_pool1.unwrap_or_default(), &act.pool1_argmax, &act.conv1);
        conv_backward(self.conv1(), &act.input, &mut d_conv1, grads, self.tensor_range(0), self.tensor_range(1), false);
    }
}

/// Routes pooled gradients back to their argmax positions and gates them by
/// the ReLU that produced `post_relu`.
fn unpool(d_pooled: &[f64], argmax: &[usize], post_relu: &Array3) -> Vec<f64> {
    let mut d = vec![0.0; post_relu.data.len()];
    for (&src, &g) in argmax.iter().zip(d_pooled) {
        d[src] += g;
    }
    for (dv, &a) in d.iter_mut().zip(&post_relu.data) {
        if a <= 0.0 {
            *dv = 0.0;
        }
    }
    d
}

/// Weight and bias gradients of a convolution given the gradient at its
/// (pre-activation) output; optionally returns the input gradient.
fn conv_backward(
    layer: ConvLayer,
    input: &Array3,
    d_out: &mut [f64],
    grads: &mut [f64],
    w_range: std::ops::Range<usize>,
    b_range: std::ops::Range<usize>,
    want_input: bool,
) -> Option<Vec<f64>> {
    let s = layer.shape;
    let oc = s.out_channels;
    let span = s.kernel * s.in_channels;
    let out_len = d_out.len() / oc;
    let mut d_in = want_input.then(|| vec![0.0; input.data.len()]);
    for pos in 0..out_len {
        let d = &d_out[pos * oc..(pos + 1) * oc];
        if d.iter().all(|&v| v == 0.0) {
            continue;
        }
        let start = pos * s.stride * s.in_channels;
        let window = &input.data[start..start + span];
        {
            let gw = &mut grads[w_range.clone()];
            for (r, &x) in window.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                for (gv, dv) in gw[r * oc..(r + 1) * oc].iter_mut().zip(d) {
                    *gv += x * dv;
                }
            }
        }
        for (gb, dv) in grads[b_range.clone()].iter_mut().zip(d) {
            *gb += dv;
        }
        if let Some(di) = d_in.as_mut() {
            for r in 0..span {
                let w = &layer.weights[r * oc..(r + 1) * oc];
                di[start + r] += w.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
            }
        }
    }
    d_in
}

/// Every intermediate stage of one forward pass. Convolution stages hold
/// post-ReLU values.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    /// Standardized input.
    pub input: Array3,
    pub conv1: Array3,
    pub pool1: Array3,
    pub pool1_argmax: Vec<usize>,
    pub conv2: Array3,
    pub pool2: Array3,
    pub pool2_argmax: Vec<usize>,
    pub hidden: Vec<f64>,
    pub logit: f64,
    pub output: f64,
}

/// `(1/N) * sum (label - predicted)^2`.
pub fn mse_loss(predicted: &[f64], labels: &[f64]) -> Result<f64, CnnError> {
    if predicted.len() != labels.len() || labels.is_empty() {
        return Err(CnnError::LabelMismatch {
            labels: labels.len(),
            snapshots: predicted.len(),
        });
    }
    Ok(predicted
        .iter()
        .zip(labels)
        .map(|(p, l)| (l - p) * (l - p))
        .sum::<f64>()
        / labels.len() as f64)
}

/// MSE loss over a batch and its gradient for every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    /// Same flat layout as [`CnnModel::params`].
    pub values: Vec<f64>,
}

// Samples per accumulation chunk. Chunks are summed in index order, so the
// result does not depend on how rayon schedules them.
const CHUNK: usize = 8;

/// Exact gradient of the batch MSE loss.
pub fn backward(model: &CnnModel, batch: &[&[f64]], labels: &[f64]) -> Result<Gradients, CnnError> {
    if batch.len() != labels.len() || batch.is_empty() {
        return Err(CnnError::LabelMismatch {
            labels: labels.len(),
            snapshots: batch.len(),
        });
    }
    let n = batch.len() as f64;
    let partial: Vec<Result<(f64, Vec<f64>), CnnError>> = batch
        .par_chunks(CHUNK)
        .zip(labels.par_chunks(CHUNK))
        .map(|(xs, ls)| {
            let mut g = vec![0.0; model.parameter_count()];
            let mut loss = 0.0;
            for (x, &l) in xs.iter().zip(ls) {
                let act = model.activations(x)?;
                let e = act.output - l;
                loss += e * e;
                model.accumulate_gradient(&act, 2.0 * e / n, &mut g);
            }
            Ok((loss, g))
        })
        .collect();
    let mut values = vec![0.0; model.parameter_count()];
    let mut loss = 0.0;
    for p in partial {
        let (l, g) = p?;
        loss += l;
        for (v, gv) in values.iter_mut().zip(&g) {
            *v += gv;
        }
    }
    Ok(Gradients {
        loss: loss / n,
        values,
    })
}
