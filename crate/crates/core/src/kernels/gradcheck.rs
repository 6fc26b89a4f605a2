//! Central finite-difference gradient checking.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Components whose gradient magnitude falls below this are compared on an
/// absolute scale of `GRAD_CHECK_FLOOR * rel_err`.
pub const GRAD_CHECK_FLOOR: f64 = 1e-4;

/// Compares the analytic gradient returned by `loss_fn` against central
/// differences `(f(p + e) - f(p - e)) / 2e` and returns the largest
/// per-component relative error
/// `|analytic - numeric| / max(|analytic|, |numeric|, GRAD_CHECK_FLOOR)`.
pub fn grad_check<T, F>(loss_fn: F, params: &Tensor<T>, epsilon: T) -> Result<T>
where
    T: Scalar,
    F: Fn(&Tensor<T>) -> Result<(T, Tensor<T>)>,
{
    if !(epsilon >= T::of(1e-8) && epsilon <= T::of(1e-3)) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must lie in [1e-8, 1e-3], got {epsilon}"
        )));
    }
    let (loss, analytic) = loss_fn(params)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite("grad_check loss"));
    }
    params.ensure_same_shape(&analytic, "grad_check")?;

    let two = T::of(2.0);
    let floor = T::of(GRAD_CHECK_FLOOR);
    let mut probe = params.clone();
    let mut worst = T::zero();
    for i in 0..params.len() {
        let orig = params.data()[i];
        probe.data_mut()[i] = orig + epsilon;
        let (plus, _) = loss_fn(&probe)?;
        probe.data_mut()[i] = orig - epsilon;
        let (minus, _) = loss_fn(&probe)?;
        probe.data_mut()[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite("grad_check loss"));
        }
        let numeric = (plus - minus) / (two * epsilon);
        let a = analytic.data()[i];
        let denom = a.abs().max(numeric.abs()).max(floor);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}
