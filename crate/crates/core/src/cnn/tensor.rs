//! Valid 1-D convolution, ReLU, max pooling and dense layers on
//! `1 x length x channels` activations.

use super::CnnError;

/// Activation volume of shape `1 x length x channels`, stored position-major:
/// element `(pos, ch)` lives at `data[pos * channels + ch]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Array3 {
    pub length: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Array3 {
    pub fn new(length: usize, channels: usize, data: Vec<f64>) -> Result<Self, CnnError> {
        if data.len() != length * channels {
            return Err(CnnError::Dimension {
                what: "array data",
                expected: length * channels,
                found: data.len(),
            });
        }
        Ok(Self {
            length,
            channels,
            data,
        })
    }

    pub fn zeros(length: usize, channels: usize) -> Self {
        Self {
            length,
            channels,
            data: vec![0.0; length * channels],
        }
    }

    /// Single-channel column from a plain sequence.
    pub fn column(values: &[f64]) -> Self {
        Self {
            length: values.len(),
            channels: 1,
            data: values.to_vec(),
        }
    }

    /// `[1, length, channels]`.
    pub fn dims(&self) -> [usize; 3] {
        [1, self.length, self.channels]
    }

    pub fn at(&self, pos: usize, ch: usize) -> f64 {
        self.data[pos * self.channels + ch]
    }
}

/// Kernel size, channel counts and stride of one convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvShape {
    pub kernel: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub stride: usize,
}

impl ConvShape {
    pub fn weight_count(&self) -> usize {
        self.kernel * self.in_channels * self.out_channels
    }

    /// `floor((len - kernel) / stride) + 1`, or an error if the kernel does
    /// not fit.
    pub fn output_length(&self, input_length: usize) -> Result<usize, CnnError> {
        if self.stride == 0 || self.kernel == 0 || input_length < self.kernel {
            return Err(CnnError::Dimension {
                what: "convolution input length",
                expected: self.kernel.max(1),
                found: input_length,
            });
        }
        Ok((input_length - self.kernel) / self.stride + 1)
    }
}

/// Convolution parameters borrowed from a model or a test fixture.
/// `weights[(k * in_channels + ic) * out_channels + oc]`.
#[derive(Debug, Clone, Copy)]
pub struct ConvLayer<'a> {
    pub shape: ConvShape,
    pub weights: &'a [f64],
    pub bias: &'a [f64],
}

/// Pooling window size and stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolShape {
    pub size: usize,
    pub stride: usize,
}

impl PoolShape {
    pub fn output_length(&self, input_length: usize) -> Result<usize, CnnError> {
        if self.stride == 0 || self.size == 0 || input_length < self.size {
            return Err(CnnError::Dimension {
                what: "pooling input length",
                expected: self.size.max(1),
                found: input_length,
            });
        }
        Ok((input_length - self.size) / self.stride + 1)
    }
}

/// Valid strided convolution with bias, no activation.
pub fn conv_forward(layer: &ConvLayer, input: &Array3) -> Result<Array3, CnnError> {
    let s = layer.shape;
    if input.channels != s.in_channels {
        return Err(CnnError::Dimension {
            what: "convolution input channels",
            expected: s.in_channels,
            found: input.channels,
        });
    }
    if layer.weights.len() != s.weight_count() || layer.bias.len() != s.out_channels {
        return Err(CnnError::Dimension {
            what: "convolution parameters",
            expected: s.weight_count() + s.out_channels,
            found: layer.weights.len() + layer.bias.len(),
        });
    }
    let out_len = s.output_length(input.length)?;
    let span = s.kernel * s.in_channels;
    let mut out = Vec::with_capacity(out_len * s.out_channels);
    for pos in 0..out_len {
        let start = pos * s.stride * s.in_channels;
        let window = &input.data[start..start + span];
        let mut acc = layer.bias.to_vec();
        matvec_rows(window, layer.weights, &mut acc);
        out.extend_from_slice(&acc);
    }
    Ok(Array3 {
        length: out_len,
        channels: s.out_channels,
        data: out,
    })
}

/// `acc[o] += sum_i x[i] * w[i * acc.len() + o]`.
pub(crate) fn matvec_rows(x: &[f64], w: &[f64], acc: &mut [f64]) {
    let n = acc.len();
    for (xi, row) in x.iter().zip(w.chunks_exact(n)) {
        if *xi == 0.0 {
            continue;
        }
        for (a, wv) in acc.iter_mut().zip(row) {
            *a += xi * wv;
        }
    }
}

pub fn relu(x: &Array3) -> Array3 {
    Array3 {
        length: x.length,
        channels: x.channels,
        data: x.data.iter().map(|&v| v.max(0.0)).collect(),
    }
}

pub(crate) fn relu_in_place(v: &mut [f64]) {
    for x in v {
        *x = x.max(0.0);
    }
}

/// Per-channel max pooling. The second value holds, for every output
/// element, the flat index into `input.data` of the winning element (the
/// first one on ties).
pub fn maxpool_forward(input: &Array3, pool: PoolShape) -> Result<(Array3, Vec<usize>), CnnError> {
    let out_len = pool.output_length(input.length)?;
    let c = input.channels;
    let mut out = Vec::with_capacity(out_len * c);
    let mut arg = Vec::with_capacity(out_len * c);
    for pos in 0..out_len {
        let base = pos * pool.stride;
        for ch in 0..c {
            let mut best = base * c + ch;
            for k in 1..pool.size {
                let idx = (base + k) * c + ch;
                if input.data[idx] > input.data[best] {
                    best = idx;
                }
            }
            out.push(input.data[best]);
            arg.push(best);
        }
    }
    Ok((
        Array3 {
            length: out_len,
            channels: c,
            data: out,
        },
        arg,
    ))
}

/// Dense layer `y = W^T x + b` with `weights[i * outputs + o]`.
pub fn dense_forward(x: &[f64], weights: &[f64], bias: &[f64]) -> Vec<f64> {
    let mut acc = bias.to_vec();
    matvec_rows(x, weights, &mut acc);
    acc
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_convolution() {
        let shape = ConvShape {
            kernel: 2,
            in_channels: 1,
            out_channels: 1,
            stride: 1,
        };
        let layer = ConvLayer {
            shape,
            weights: &[1.0, -1.0],
            bias: &[0.0],
        };
        let out = conv_forward(&layer, &Array3::column(&[1.0, 2.0, 4.0, 8.0, 16.0])).unwrap();
        assert_eq!(out.data, vec![-1.0, -2.0, -4.0, -8.0]);
        assert_eq!(out.dims(), [1, 4, 1]);
    }

    #[test]
    fn canonical_first_layer_shape() {
        let shape = ConvShape {
            kernel: 100,
            in_channels: 1,
            out_channels: 64,
            stride: 50,
        };
        let w = vec![0.0; shape.weight_count()];
        let b = vec![0.0; 64];
        let out = conv_forward(
            &ConvLayer {
                shape,
                weights: &w,
                bias: &b,
            },
            &Array3::zeros(2560, 1),
        )
        .unwrap();
        assert_eq!(out.dims(), [1, 50, 64]);
        assert!(out.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn multichannel_convolution_matches_direct_sum() {
        let shape = ConvShape {
            kernel: 2,
            in_channels: 2,
            out_channels: 3,
            stride: 2,
        };
        let w: Vec<f64> = (0..12).map(|i| 0.1 * i as f64 - 0.4).collect();
        let b = [0.5, -0.5, 1.0];
        let input = Array3::new(5, 2, (0..10).map(|i| (i as f64).sin()).collect()).unwrap();
        let out = conv_forward(
            &ConvLayer {
                shape,
                weights: &w,
                bias: &b,
            },
            &input,
        )
        .unwrap();
        assert_eq!(out.length, 2);
        for pos in 0..2 {
            for oc in 0..3 {
                let mut v = b[oc];
                for k in 0..2 {
                    for ic in 0..2 {
                        v += input.at(pos * 2 + k, ic) * w[(k * 2 + ic) * 3 + oc];
                    }
                }
                assert!((out.at(pos, oc) - v).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn convolution_shape_errors() {
        let shape = ConvShape {
            kernel: 3,
            in_channels: 2,
            out_channels: 1,
            stride: 1,
        };
        let w = vec![0.0; 6];
        let layer = ConvLayer {
            shape,
            weights: &w,
            bias: &[0.0],
        };
        assert!(conv_forward(&layer, &Array3::zeros(5, 1)).is_err());
        assert!(conv_forward(&layer, &Array3::zeros(2, 2)).is_err());
    }

    #[test]
    fn relu_examples() {
        let r = relu(&Array3::column(&[-1.0, 0.0, 2.0]));
        assert_eq!(r.data, vec![0.0, 0.0, 2.0]);
        assert!(relu(&Array3::column(&[-3.0, -0.5])).data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn maxpool_examples() {
        let (p, arg) = maxpool_forward(
            &Array3::column(&[3.0, 1.0, 4.0, 1.0]),
            PoolShape { size: 2, stride: 2 },
        )
        .unwrap();
        assert_eq!(p.data, vec![3.0, 4.0]);
        assert_eq!(arg, vec![0, 2]);

        let (p, _) = maxpool_forward(&Array3::zeros(50, 64), PoolShape { size: 2, stride: 2 }).unwrap();
        assert_eq!(p.dims(), [1, 25, 64]);
    }

    #[test]
    fn sigmoid_is_stable_and_symmetric() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        for z in [-5.0, -0.3, 0.7, 12.0] {
            assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() < 1e-15);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn relu_is_idempotent(v in prop::collection::vec(-10.0f64..10.0, 1..40)) {
                let x = Array3::column(&v);
                prop_assert_eq!(relu(&relu(&x)), relu(&x));
            }

            #[test]
            fn increasing_input_pools_to_right_element(start in -5.0f64..5.0, steps in prop::collection::vec(0.01f64..3.0, 4..40)) {
                let mut v = vec![start];
                for s in &steps {
                    v.push(v.last().unwrap() + s);
                }
                let (p, arg) = maxpool_forward(&Array3::column(&v), PoolShape { size: 2, stride: 2 }).unwrap();
                for (j, (&val, &a)) in p.data.iter().zip(&arg).enumerate() {
                    prop_assert_eq!(a, 2 * j + 1);
                    prop_assert_eq!(val, v[2 * j + 1]);
                }
            }
        }
    }
}
