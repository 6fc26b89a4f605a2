//! Fully-connected layer `y = act(W x + b)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use super::linalg::{axpy, dot};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub fn dense_forward<T: Scalar>(
    weights: &Tensor<T>,
    bias: &Tensor<T>,
    x: &Tensor<T>,
    activation: ActivationKind,
) -> Result<Tensor<T>> {
    check_dims(weights, bias, x.len())?;
    Ok(Tensor::vector(dense_apply(weights, bias, x.data(), activation)))
}

fn check_dims<T: Scalar>(weights: &Tensor<T>, bias: &Tensor<T>, input_len: usize) -> Result<()> {
    if weights.rank() != 2 {
        return Err(Error::shape(
            "dense",
            format!("weights must be rank 2, got {:?}", weights.shape()),
        ));
    }
    let (rows, cols) = (weights.shape()[0], weights.shape()[1]);
    if cols != input_len {
        return Err(Error::shape(
            "dense",
            format!("weight columns {cols} != input length {input_len}"),
        ));
    }
    if bias.len() != rows {
        return Err(Error::shape(
            "dense",
            format!("bias length {} != weight rows {rows}", bias.len()),
        ));
    }
    Ok(())
}

/// Unchecked core of [`dense_forward`] on slices.
pub(crate) fn dense_apply<T: Scalar>(
    weights: &Tensor<T>,
    bias: &Tensor<T>,
    x: &[T],
    activation: ActivationKind,
) -> Vec<T> {
    let cols = x.len();
    weights
        .data()
        .chunks_exact(cols)
        .zip(bias.data())
        .map(|(row, &b)| {
            activation.apply(b + dot(row, x))
        })
        .collect()
}

/// Dense layer parameters with an attached activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dense<T = f64> {
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
    pub activation: ActivationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads<T = f64> {
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> DenseGrads<T> {
    pub fn zeros_like(layer: &Dense<T>) -> Self {
        DenseGrads {
            weights: Tensor::zeros(layer.weights.shape()),
            bias: Tensor::zeros(layer.bias.shape()),
        }
    }
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(inputs: usize, outputs: usize, activation: ActivationKind) -> Self {
        Dense {
            weights: Tensor::zeros(&[outputs, inputs]),
            bias: Tensor::zeros(&[outputs]),
            activation,
        }
    }

    /// Uniform init in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn init(inputs: usize, outputs: usize, activation: ActivationKind, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let data = (0..inputs * outputs)
            .map(|_| T::of(rng.random_range(-limit..limit)))
            .collect();
        Dense {
            weights: Tensor::from_vec(vec![outputs, inputs], data).expect("shape"),
            bias: Tensor::zeros(&[outputs]),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        check_dims(&self.weights, &self.bias, x.len())?;
        Ok(dense_apply(&self.weights, &self.bias, x, self.activation))
    }

    /// Accumulates parameter gradients into `grads` and returns `dL/dx`.
    ///
    /// `y` is this layer's post-activation output for input `x`.
    pub fn backward(&self, x: &[T], y: &[T], dy: &[T], grads: &mut DenseGrads<T>) -> Vec<T> {
        let cols = self.inputs();
        let mut dx = vec![T::zero(); cols];
        let gw = grads.weights.data_mut();
        let gb = grads.bias.data_mut();
        for (r, row) in self.weights.data().chunks_exact(cols).enumerate() {
            let dz = dy[r] * self.activation.derivative_from_output(y[r]);
            if dz == T::zero() {
                continue;
            }
            gb[r] += dz;
            axpy(dz, x, &mut gw[r * cols..(r + 1) * cols]);
            axpy(dz, row, &mut dx);
        }
        dx
    }
}
