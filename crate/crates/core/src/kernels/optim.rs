//! L2 weight penalty and plain SGD.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Squared Euclidean norm `sum_i w_i^2`.
pub fn l2_penalty<T: Scalar>(weights: &Tensor<T>) -> T {
    weights.data().iter().map(|&w| w * w).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    /// Coefficient of the `lambda * ||w||^2` term in the loss.
    pub l2_lambda: f64,
    pub seed: u64,
}

impl SgdConfig {
    pub fn new(learning_rate: f64, l2_lambda: f64, seed: u64) -> Result<Self> {
        let cfg = SgdConfig {
            learning_rate,
            l2_lambda,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "l2_lambda must be non-negative, got {}",
                self.l2_lambda
            )));
        }
        Ok(())
    }
}

/// In-place update `p <- p - lr * (g + 2 * lambda * p)`.
pub fn sgd_update<T: Scalar>(param: &mut Tensor<T>, grad: &Tensor<T>, cfg: &SgdConfig) -> Result<()> {
    param.ensure_same_shape(grad, "sgd")?;
    let lr = T::of(cfg.learning_rate);
    let decay = T::of(2.0 * cfg.l2_lambda);
    for (p, &g) in param.data_mut().iter_mut().zip(grad.data()) {
        *p = *p - lr * (g + decay * *p);
    }
    Ok(())
}

/// Returns the parameter set after one SGD step.
pub fn sgd_step<T: Scalar>(
    params: &[Tensor<T>],
    grads: &[Tensor<T>],
    cfg: &SgdConfig,
) -> Result<Vec<Tensor<T>>> {
    cfg.validate()?;
    if params.len() != grads.len() {
        return Err(Error::shape(
            "sgd",
            format!("{} parameters vs {} gradients", params.len(), grads.len()),
        ));
    }
    params
        .iter()
        .zip(grads)
        .map(|(p, g)| {
            let mut p = p.clone();
            sgd_update(&mut p, g, cfg)?;
            Ok(p)
        })
        .collect()
}
