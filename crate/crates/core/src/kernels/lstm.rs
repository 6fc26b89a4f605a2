//! Single-layer LSTM cell with a forget gate.
//!
//! Gate rows are stacked in the order input, forget, output, candidate:
//! `z = W_x x + W_h h_prev + b`, split into four blocks of `hidden_size`.
//!
//! ```text
//! i = sigmoid(z_i)   f = sigmoid(z_f)   o = sigmoid(z_o)   g = tanh(z_g)
//! c = f * c_prev + i * g
//! h = o * tanh(c)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::sigmoid;
use super::linalg::{axpy, dot};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LstmParams<T = f64> {
    pub input_size: usize,
    pub hidden_size: usize,
    /// `[4 * hidden, input]`
    pub w_x: Tensor<T>,
    /// `[4 * hidden, hidden]`
    pub w_h: Tensor<T>,
    /// `[4 * hidden]`
    pub bias: Tensor<T>,
}

/// Forget-gate bias used by [`LstmParams::init`].
pub const FORGET_BIAS_INIT: f64 = 1.0;

impl<T: Scalar> LstmParams<T> {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        assert!(input_size > 0 && hidden_size > 0, "LSTM sizes must be positive");
        LstmParams {
            input_size,
            hidden_size,
            w_x: Tensor::zeros(&[4 * hidden_size, input_size]),
            w_h: Tensor::zeros(&[4 * hidden_size, hidden_size]),
            bias: Tensor::zeros(&[4 * hidden_size]),
        }
    }

    /// Weights uniform in `±1/sqrt(hidden_size)`, forget bias 1, other biases 0.
    pub fn init(input_size: usize, hidden_size: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::zeros(input_size, hidden_size);
        let limit = 1.0 / (hidden_size as f64).sqrt();
        for w in p.w_x.data_mut().iter_mut().chain(p.w_h.data_mut().iter_mut()) {
            *w = T::of(rng.random_range(-limit..limit));
        }
        for b in &mut p.bias.data_mut()[hidden_size..2 * hidden_size] {
            *b = T::of(FORGET_BIAS_INIT);
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let (i, h) = (self.input_size, self.hidden_size);
        if self.w_x.shape() != [4 * h, i] || self.w_h.shape() != [4 * h, h] || self.bias.shape() != [4 * h] {
            return Err(Error::shape(
                "lstm params",
                format!(
                    "w_x {:?}, w_h {:?}, bias {:?} inconsistent with input {i}, hidden {h}",
                    self.w_x.shape(),
                    self.w_h.shape(),
                    self.bias.shape()
                ),
            ));
        }
        Ok(())
    }
}

/// Activations saved by [`LstmCell::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache<T = f64> {
    pub x: Vec<T>,
    pub h_prev: Vec<T>,
    pub c_prev: Vec<T>,
    /// Post-nonlinearity gates `[i, f, o, g]`, each `hidden` long.
    pub gates: Vec<T>,
    pub c: Vec<T>,
    pub tanh_c: Vec<T>,
    pub h: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads<T = f64> {
    pub w_x: Tensor<T>,
    pub w_h: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> LstmGrads<T> {
    pub fn zeros_like(p: &LstmParams<T>) -> Self {
        LstmGrads {
            w_x: Tensor::zeros(p.w_x.shape()),
            w_h: Tensor::zeros(p.w_h.shape()),
            bias: Tensor::zeros(p.bias.shape()),
        }
    }
}

/// One LSTM update; returns `(h, c)`.
pub fn lstm_step<T: Scalar>(
    params: &LstmParams<T>,
    x: &Tensor<T>,
    h_prev: &Tensor<T>,
    c_prev: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>)> {
    params.validate()?;
    let cache = params.forward_cached(x.data(), h_prev.data(), c_prev.data())?;
    Ok((Tensor::vector(cache.h), Tensor::vector(cache.c)))
}

pub trait LstmCell<T: Scalar> {
    fn forward_cached(&self, x: &[T], h_prev: &[T], c_prev: &[T]) -> Result<LstmCache<T>>;

    /// Backpropagates `dh`, `dc` (gradients w.r.t. this step's `h` and `c`)
    /// through one step. Accumulates parameter gradients into `grads` and
    /// returns `(dx, dh_prev, dc_prev)`.
    fn backward(&self, cache: &LstmCache<T>, dh: &[T], dc: &[T], grads: &mut LstmGrads<T>) -> (Vec<T>, Vec<T>, Vec<T>);
}

impl<T: Scalar> LstmCell<T> for LstmParams<T> {
    fn forward_cached(&self, x: &[T], h_prev: &[T], c_prev: &[T]) -> Result<LstmCache<T>> {
        let (ni, nh) = (self.input_size, self.hidden_size);
        if x.len() != ni {
            return Err(Error::shape("lstm step", format!("x has length {}, input_size is {ni}", x.len())));
        }
        if h_prev.len() != nh || c_prev.len() != nh {
            return Err(Error::shape(
                "lstm step",
                format!("state lengths {} / {}, hidden_size is {nh}", h_prev.len(), c_prev.len()),
            ));
        }
        let wx = self.w_x.data();
        let wh = self.w_h.data();
        let mut gates: Vec<T> = self.bias.data().to_vec();
        for (r, z) in gates.iter_mut().enumerate() {
            let row_x = &wx[r * ni..(r + 1) * ni];
            let row_h = &wh[r * nh..(r + 1) * nh];
            *z += dot(row_x, x) + dot(row_h, h_prev);
        }
        for z in &mut gates[..3 * nh] {
            *z = sigmoid(*z);
        }
        for z in &mut gates[3 * nh..] {
            *z = z.tanh();
        }
        let mut c = vec![T::zero(); nh];
        let mut tanh_c = vec![T::zero(); nh];
        let mut h = vec![T::zero(); nh];
        for j in 0..nh {
            let (i, f, o, g) = (gates[j], gates[nh + j], gates[2 * nh + j], gates[3 * nh + j]);
            c[j] = f * c_prev[j] + i * g;
            tanh_c[j] = c[j].tanh();
            h[j] = o * tanh_c[j];
        }
        Ok(LstmCache {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            gates,
            c,
            tanh_c,
            h,
        })
    }

    fn backward(&self, cache: &LstmCache<T>, dh: &[T], dc: &[T], grads: &mut LstmGrads<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
        let (ni, nh) = (self.input_size, self.hidden_size);
        let one = T::one();
        let g = &cache.gates;
        let mut dz = vec![T::zero(); 4 * nh];
        let mut dc_prev = vec![T::zero(); nh];
        for j in 0..nh {
            let (i, f, o, gg) = (g[j], g[nh + j], g[2 * nh + j], g[3 * nh + j]);
            let tc = cache.tanh_c[j];
            let dcj = dc[j] + dh[j] * o * (one - tc * tc);
            dz[j] = dcj * gg * i * (one - i);
            dz[nh + j] = dcj * cache.c_prev[j] * f * (one - f);
            dz[2 * nh + j] = dh[j] * tc * o * (one - o);
            dz[3 * nh + j] = dcj * i * (one - gg * gg);
            dc_prev[j] = dcj * f;
        }

        let mut dx = vec![T::zero(); ni];
        let mut dh_prev = vec![T::zero(); nh];
        let (wx, wh) = (self.w_x.data(), self.w_h.data());
        let gwx = grads.w_x.data_mut();
        for (r, &d) in dz.iter().enumerate() {
            axpy(d, &cache.x, &mut gwx[r * ni..(r + 1) * ni]);
            axpy(d, &wx[r * ni..(r + 1) * ni], &mut dx);
        }
        let gwh = grads.w_h.data_mut();
        for (r, &d) in dz.iter().enumerate() {
            axpy(d, &cache.h_prev, &mut gwh[r * nh..(r + 1) * nh]);
            axpy(d, &wh[r * nh..(r + 1) * nh], &mut dh_prev);
        }
        for (b, &d) in grads.bias.data_mut().iter_mut().zip(&dz) {
            *b += d;
        }
        (dx, dh_prev, dc_prev)
    }
}
