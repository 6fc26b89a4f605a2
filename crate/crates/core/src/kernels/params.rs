//! Uniform access to a model's trainable parameters as flat slices.

use super::conv::{ConvGrads, ConvSpec};
use super::dense::{Dense, DenseGrads};
use super::lstm::{LstmGrads, LstmParams};
use super::optim::SgdConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// A model or gradient buffer exposing its parameters in a fixed order.
///
/// A model and its gradient type must list their slices in the same order
/// with the same lengths.
pub trait Parameterized<T: Scalar> {
    fn param_slices(&self) -> Vec<&[T]>;

    fn param_slices_mut(&mut self) -> Vec<&mut [T]>;

    fn param_count(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    /// Concatenation of every parameter slice.
    fn flatten(&self) -> Tensor<T> {
        let data: Vec<T> = self.param_slices().into_iter().flatten().copied().collect();
        Tensor::vector(data)
    }

    /// Overwrites parameters from a flat vector produced by [`flatten`](Self::flatten).
    fn load_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::shape(
                "load_flat",
                format!("{} values for {} parameters", flat.len(), self.param_count()),
            ));
        }
        let mut offset = 0;
        for s in self.param_slices_mut() {
            let n = s.len();
            s.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    fn zero(&mut self) {
        for s in self.param_slices_mut() {
            s.fill(T::zero());
        }
    }

    /// `self += scale * other`.
    fn add_scaled(&mut self, other: &Self, scale: T) {
        for (dst, src) in self.param_slices_mut().into_iter().zip(other.param_slices()) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    /// Sum of squared parameters.
    fn squared_norm(&self) -> T {
        self.param_slices()
            .into_iter()
            .flatten()
            .map(|&v| v * v)
            .sum()
    }
}

/// One SGD step `p <- p - lr * (scale * g + 2 * lambda * p)` over every
/// parameter slice; `scale` typically averages a summed batch gradient.
pub fn apply_sgd<T, M, G>(model: &mut M, grads: &G, scale: T, cfg: &SgdConfig) -> Result<()>
where
    T: Scalar,
    M: Parameterized<T>,
    G: Parameterized<T>,
{
    cfg.validate()?;
    let lr = T::of(cfg.learning_rate);
    let decay = T::of(2.0 * cfg.l2_lambda);
    let grad_slices = grads.param_slices();
    let mut params = model.param_slices_mut();
    if params.len() != grad_slices.len() {
        return Err(Error::shape(
            "sgd",
            format!("{} parameter slices vs {} gradient slices", params.len(), grad_slices.len()),
        ));
    }
    for (p, g) in params.iter_mut().zip(&grad_slices) {
        if p.len() != g.len() {
            return Err(Error::shape("sgd", format!("slice lengths {} vs {}", p.len(), g.len())));
        }
        for (pv, &gv) in p.iter_mut().zip(g.iter()) {
            *pv = *pv - lr * (scale * gv + decay * *pv);
        }
    }
    Ok(())
}

/// Rescales gradients so their global L2 norm is at most `max_norm`.
pub fn clip_grad_norm<T: Scalar, G: Parameterized<T>>(grads: &mut G, max_norm: T) -> T {
    let norm = grads.squared_norm().sqrt();
    if norm > max_norm && norm > T::zero() {
        let k = max_norm / norm;
        for s in grads.param_slices_mut() {
            for v in s.iter_mut() {
                *v *= k;
            }
        }
    }
    norm
}


impl<T: Scalar> Parameterized<T> for Dense<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        vec![self.weights.data(), self.bias.data()]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.weights.data_mut(), self.bias.data_mut()]
    }
}

impl<T: Scalar> Parameterized<T> for DenseGrads<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        vec![self.weights.data(), self.bias.data()]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.weights.data_mut(), self.bias.data_mut()]
    }
}

impl<T: Scalar> Parameterized<T> for LstmParams<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        vec![self.w_x.data(), self.w_h.data(), self.bias.data()]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.w_x.data_mut(), self.w_h.data_mut(), self.bias.data_mut()]
    }
}

impl<T: Scalar> Parameterized<T> for LstmGrads<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        vec![self.w_x.data(), self.w_h.data(), self.bias.data()]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.w_x.data_mut(), self.w_h.data_mut(), self.bias.data_mut()]
    }
}

impl<T: Scalar> Parameterized<T> for ConvSpec<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        vec![self.kernel.data(), &self.bias]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.kernel.data_mut(), &mut self.bias]
    }
}

/// Parameter gradients only; the input gradient is not part of the list.
impl<T: Scalar> Parameterized<T> for ConvGrads<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        vec![self.kernel.data(), &self.bias]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.kernel.data_mut(), &mut self.bias]
    }
}
