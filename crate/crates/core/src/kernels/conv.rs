//! Multi-channel cross-correlation over 1, 2 or 3 spatial dimensions.
//!
//! Layouts (row-major):
//! - input  `[C_in, D_1, .., D_n]`
//! - kernel `[C_out, C_in, K_1, .., K_n]`
//! - output `[C_out, O_1, .., O_n]`
//!
//! Every output element is `act(sum over (c_in, kernel offset) of
//! w * x[stride * o + offset - pad_lo] + bias[c_out])`. The kernel is not
//! flipped. Positions that fall into the padding contribute zero.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// No padding; output extent `(D - K) / stride + 1`.
    Valid,
    /// Zero padding so the output extent is `ceil(D / stride)`; the extra
    /// row goes after the data when the total padding is odd.
    Same,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ConvSpec<T = f64> {
    pub kernel: Tensor<T>,
    pub bias: Vec<T>,
    pub stride: Vec<usize>,
    pub padding: Padding,
    pub activation: ActivationKind,
}

impl<T: Scalar> ConvSpec<T> {
    pub fn new(
        kernel: Tensor<T>,
        bias: Vec<T>,
        stride: Vec<usize>,
        padding: Padding,
        activation: ActivationKind,
    ) -> Result<Self> {
        let spec = ConvSpec {
            kernel,
            bias,
            stride,
            padding,
            activation,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit-stride, valid-padding spec with zero bias.
    pub fn simple(kernel: Tensor<T>, activation: ActivationKind) -> Result<Self> {
        let out_channels = kernel.shape().first().copied().unwrap_or(0);
        let spatial = kernel.rank().saturating_sub(2);
        Self::new(
            kernel,
            vec![T::zero(); out_channels],
            vec![1; spatial],
            Padding::Valid,
            activation,
        )
    }

    /// Uniform He-style init in `±sqrt(6 / fan_in)`, zero bias.
    pub fn init(
        in_channels: usize,
        out_channels: usize,
        kernel_dims: &[usize],
        activation: ActivationKind,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let fan_in = in_channels * kernel_dims.iter().product::<usize>();
        let limit = (6.0 / fan_in as f64).sqrt();
        let mut shape = vec![out_channels, in_channels];
        shape.extend_from_slice(kernel_dims);
        let n = shape.iter().product();
        let data = (0..n)
            .map(|_| T::of(rng.random_range(-limit..limit)))
            .collect();
        Self::new(
            Tensor::from_vec(shape, data)?,
            vec![T::zero(); out_channels],
            vec![1; kernel_dims.len()],
            Padding::Valid,
            activation,
        )
    }

    pub fn spatial_rank(&self) -> usize {
        self.kernel.rank() - 2
    }

    pub fn out_channels(&self) -> usize {
        self.kernel.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernel.shape()[1]
    }

    pub fn kernel_dims(&self) -> &[usize] {
        &self.kernel.shape()[2..]
    }

    pub fn validate(&self) -> Result<()> {
        let rank = self.kernel.rank();
        if !(3..=5).contains(&rank) {
            return Err(Error::shape(
                "conv kernel",
                format!("kernel rank must be 3..=5 (1-3 spatial dims), got {rank}"),
            ));
        }
        if self.stride.len() != rank - 2 {
            return Err(Error::shape(
                "conv stride",
                format!("{} stride entries for {} spatial dims", self.stride.len(), rank - 2),
            ));
        }
        if self.stride.contains(&0) {
            return Err(Error::InvalidConfig("conv stride must be >= 1".into()));
        }
        if self.bias.len() != self.out_channels() {
            return Err(Error::shape(
                "conv bias",
                format!("{} biases for {} output channels", self.bias.len(), self.out_channels()),
            ));
        }
        Ok(())
    }

    /// Output shape for an input of the given shape.
    pub fn output_shape(&self, input_shape: &[usize]) -> Result<Vec<usize>> {
        let geo = Geometry::new(self, input_shape)?;
        let n = self.spatial_rank();
        let mut shape = vec![geo.cout];
        shape.extend_from_slice(&geo.out[3 - n..]);
        Ok(shape)
    }
}

/// Spatial geometry padded to three dimensions (leading extents of 1).
#[derive(Debug, Clone, Copy)]
struct Geometry {
    cin: usize,
    cout: usize,
    dims: [usize; 3],
    k: [usize; 3],
    stride: [usize; 3],
    out: [usize; 3],
    pad_lo: [usize; 3],
}

const AXIS_NAMES: [&str; 3] = ["first", "second", "third"];

impl Geometry {
    fn new<T: Scalar>(spec: &ConvSpec<T>, input_shape: &[usize]) -> Result<Self> {
        spec.validate()?;
        let n = spec.spatial_rank();
        if input_shape.len() != n + 1 {
            return Err(Error::shape(
                "conv input",
                format!(
                    "expected rank {} ([C, {} spatial]), got shape {input_shape:?}",
                    n + 1,
                    n
                ),
            ));
        }
        if input_shape[0] != spec.in_channels() {
            return Err(Error::shape(
                "conv input",
                format!(
                    "channel dimension is {}, kernel expects {}",
                    input_shape[0],
                    spec.in_channels()
                ),
            ));
        }
        let mut geo = Geometry {
            cin: spec.in_channels(),
            cout: spec.out_channels(),
            dims: [1; 3],
            k: [1; 3],
            stride: [1; 3],
            out: [1; 3],
            pad_lo: [0; 3],
        };
        for a in 0..n {
            let slot = 3 - n + a;
            let (d, k, s) = (input_shape[1 + a], spec.kernel_dims()[a], spec.stride[a]);
            geo.dims[slot] = d;
            geo.k[slot] = k;
            geo.stride[slot] = s;
            match spec.padding {
                Padding::Valid => {
                    if d < k {
                        return Err(Error::shape(
                            "conv input",
                            format!(
                                "{} spatial dimension {d} is smaller than kernel extent {k}",
                                AXIS_NAMES[a]
                            ),
                        ));
                    }
                    geo.out[slot] = (d - k) / s + 1;
                }
                Padding::Same => {
                    let o = d.div_ceil(s);
                    let total = ((o - 1) * s + k).saturating_sub(d);
                    geo.out[slot] = o;
                    geo.pad_lo[slot] = total / 2;
                }
            }
        }
        Ok(geo)
    }

    #[inline]
    fn in_index(&self, c: usize, p: [usize; 3]) -> usize {
        ((c * self.dims[0] + p[0]) * self.dims[1] + p[1]) * self.dims[2] + p[2]
    }

    #[inline]
    fn source(&self, axis: usize, o: usize, k: usize) -> Option<usize> {
        (o * self.stride[axis] + k).checked_sub(self.pad_lo[axis]).filter(|&i| i < self.dims[axis])
    }

    fn out_len(&self) -> usize {
        self.cout * self.out.iter().product::<usize>()
    }

    /// Visits every contributing tap as a run along the last spatial axis:
    /// for `j in 0..len`, output `out_start + j` pairs with input
    /// `in_start + j * in_step` under kernel weight `w_idx`. Runs are
    /// produced in a fixed order.
    #[inline]
    fn for_each_run(&self, co: usize, mut f: impl FnMut(usize, usize, usize, usize, usize)) {
        let kvol = self.k[0] * self.k[1] * self.k[2];
        let out_plane = self.out[1] * self.out[2];
        let out_base = co * self.out[0] * out_plane;
        let s2 = self.stride[2];
        for ci in 0..self.cin {
            let wbase = (co * self.cin + ci) * kvol;
            for k0 in 0..self.k[0] {
                for k1 in 0..self.k[1] {
                    for k2 in 0..self.k[2] {
                        let w_idx = wbase + (k0 * self.k[1] + k1) * self.k[2] + k2;
                        // o2 range whose source index o2*s2 + k2 - pad lies in [0, D).
                        let pad = self.pad_lo[2];
                        let lo = if pad > k2 { (pad - k2).div_ceil(s2) } else { 0 };
                        let hi = if self.dims[2] + pad > k2 {
                            ((self.dims[2] + pad - k2 - 1) / s2 + 1).min(self.out[2])
                        } else {
                            0
                        };
                        if lo >= hi {
                            continue;
                        }
                        let i2_lo = lo * s2 + k2 - pad;
                        for o0 in 0..self.out[0] {
                            let Some(i0) = self.source(0, o0, k0) else { continue };
                            for o1 in 0..self.out[1] {
                                let Some(i1) = self.source(1, o1, k1) else { continue };
                                let out_start = out_base + o0 * out_plane + o1 * self.out[2] + lo;
                                let in_start = self.in_index(ci, [i0, i1, i2_lo]);
                                f(w_idx, out_start, in_start, hi - lo, s2);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Forward convolution followed by the spec's activation.
pub fn conv_forward<T: Scalar>(input: &Tensor<T>, spec: &ConvSpec<T>) -> Result<Tensor<T>> {
    input.ensure_finite("conv input")?;
    let geo = Geometry::new(spec, input.shape())?;
    let mut pre = vec![T::zero(); geo.out_len()];
    let per_channel = geo.out.iter().product::<usize>();
    let (w, x) = (spec.kernel.data(), input.data());
    for co in 0..geo.cout {
        pre[co * per_channel..(co + 1) * per_channel].fill(spec.bias[co]);
        geo.for_each_run(co, |k, o, i, len, step| {
            let wk = w[k];
            let out = &mut pre[o..o + len];
            if step == 1 {
                for (y, &v) in out.iter_mut().zip(&x[i..i + len]) {
                    *y += wk * v;
                }
            } else {
                for (j, y) in out.iter_mut().enumerate() {
                    *y += wk * x[i + j * step];
                }
            }
        });
    }
    for v in pre.iter_mut() {
        *v = spec.activation.apply(*v);
    }
    Tensor::from_vec(spec.output_shape(input.shape())?, pre)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads<T = f64> {
    pub input: Tensor<T>,
    pub kernel: Tensor<T>,
    pub bias: Vec<T>,
}

/// Gradients of a convolution given its input, its activated output and
/// `dL/d output`.
pub fn conv_backward<T: Scalar>(
    input: &Tensor<T>,
    spec: &ConvSpec<T>,
    output: &Tensor<T>,
    d_output: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    conv_backward_impl(input, spec, output, d_output, true)
}

/// As [`conv_backward`]; when `need_input` is false the input gradient is
/// left at zero and not computed.
pub(crate) fn conv_backward_impl<T: Scalar>(
    input: &Tensor<T>,
    spec: &ConvSpec<T>,
    output: &Tensor<T>,
    d_output: &Tensor<T>,
    need_input: bool,
) -> Result<ConvGrads<T>> {
    let geo = Geometry::new(spec, input.shape())?;
    output.ensure_same_shape(d_output, "conv backward")?;
    if output.len() != geo.out_len() {
        return Err(Error::shape(
            "conv backward",
            format!("output has {} elements, expected {}", output.len(), geo.out_len()),
        ));
    }
    let dz: Vec<T> = output
        .data()
        .iter()
        .zip(d_output.data())
        .map(|(&y, &g)| g * spec.activation.derivative_from_output(y))
        .collect();

    let per_channel = geo.out.iter().product::<usize>();
    let mut d_in = vec![T::zero(); input.len()];
    let mut d_k = vec![T::zero(); spec.kernel.len()];
    let mut d_b = vec![T::zero(); geo.cout];
    let (w, x) = (spec.kernel.data(), input.data());
    for co in 0..geo.cout {
        d_b[co] = dz[co * per_channel..(co + 1) * per_channel].iter().copied().sum();
        geo.for_each_run(co, |k, o, i, len, step| {
            let g = &dz[o..o + len];
            let mut acc = T::zero();
            for (j, &gj) in g.iter().enumerate() {
                acc += gj * x[i + j * step];
            }
            d_k[k] += acc;
            if need_input {
                let wk = w[k];
                for (j, &gj) in g.iter().enumerate() {
                    d_in[i + j * step] += gj * wk;
                }
            }
        });
    }
    Ok(ConvGrads {
        input: Tensor::from_vec(input.shape().to_vec(), d_in)?,
        kernel: Tensor::from_vec(spec.kernel.shape().to_vec(), d_k)?,
        bias: d_b,
    })
}
