//! Alpha-weighted linear fusion of two probability vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::ProbVector;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub alpha: f64,
}

impl FusionConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(FusionConfig { alpha })
    }
}

/// `alpha * p_rgb + (1 - alpha) * p_skel`. The endpoints return the
/// corresponding input unchanged.
pub fn alpha_fuse<T: Scalar>(p_rgb: &ProbVector<T>, p_skel: &ProbVector<T>, cfg: FusionConfig) -> Result<ProbVector<T>> {
    if p_rgb.len() != p_skel.len() {
        return Err(Error::shape(
            "alpha fuse",
            format!("probability lengths {} and {}", p_rgb.len(), p_skel.len()),
        ));
    }
    FusionConfig::new(cfg.alpha)?;
    if cfg.alpha == 1.0 {
        return Ok(p_rgb.clone());
    }
    if cfg.alpha == 0.0 {
        return Ok(p_skel.clone());
    }
    let a = T::of(cfg.alpha);
    let b = T::one() - a;
    ProbVector::new(
        p_rgb
            .as_slice()
            .iter()
            .zip(p_skel.as_slice())
            .map(|(&x, &y)| a * x + b * y)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opposite_one_hots() {
        let p = ProbVector::new(vec![1.0_f64, 0.0]).unwrap();
        let q = ProbVector::new(vec![0.0_f64, 1.0]).unwrap();
        let f = alpha_fuse(&p, &q, FusionConfig::new(0.6).unwrap()).unwrap();
        assert!((f.get(0) - 0.6).abs() < 1e-15 && (f.get(1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_alpha_and_lengths() {
        assert!(FusionConfig::new(1.5).is_err());
        assert!(FusionConfig::new(f64::NAN).is_err());
        let p = ProbVector::<f64>::uniform(2);
        let q = ProbVector::<f64>::uniform(3);
        assert!(alpha_fuse(&p, &q, FusionConfig::new(0.5).unwrap()).is_err());
    }
}
