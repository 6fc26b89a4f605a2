//! Feature concatenation and the softmax decision layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::linalg::dot;
use crate::kernels::{argmax_decision, softmax_slice, ProbVector};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSource {
    Image,
    Speech,
    Skeleton,
    Fused,
}

/// A finite feature vector tagged with the modality that produced it.
/// May be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T = f64> {
    values: Vec<T>,
    pub source: FeatureSource,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(values: Vec<T>, source: FeatureSource) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector"));
        }
        Ok(FeatureVector { values, source })
    }

    pub fn from_tensor(t: &Tensor<T>, source: FeatureSource) -> Result<Self> {
        Self::new(t.data().to_vec(), source)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `S = [Q, W]`: `q` first, then `w`.
pub fn concat_features<T: Scalar>(q: &FeatureVector<T>, w: &FeatureVector<T>) -> FeatureVector<T> {
    let mut values = Vec::with_capacity(q.len() + w.len());
    values.extend_from_slice(q.values());
    values.extend_from_slice(w.values());
    FeatureVector {
        values,
        source: FeatureSource::Fused,
    }
}

/// Logits `z_d = c_d . s` for each row `c_d` of `weights` (`[classes, len(s)]`),
/// their softmax, and the decided class index (lowest index on ties).
pub fn softmax_classify<T: Scalar>(s: &FeatureVector<T>, weights: &Tensor<T>) -> Result<(ProbVector<T>, usize)> {
    if weights.rank() != 2 || weights.shape()[1] != s.len() {
        return Err(Error::shape(
            "softmax classify",
            format!("weights {:?} do not match feature length {}", weights.shape(), s.len()),
        ));
    }
    let n = s.len();
    let logits: Vec<T> = (0..weights.shape()[0])
        .map(|d| dot(&weights.data()[d * n..(d + 1) * n], s.values()))
        .collect();
    let probs = softmax_slice(&logits)?;
    let class = argmax_decision(&probs);
    Ok((probs, class))
}
