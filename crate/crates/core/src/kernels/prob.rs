//! Probability vectors, softmax and the argmax decision rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Scalar};
use crate::tensor::Tensor;

/// Non-negative class scores summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Scalar")]
pub struct ProbVector<T = f64>(Vec<T>);

impl<T: Scalar> ProbVector<T> {
    /// Sum-to-one tolerance: `sqrt(machine epsilon)` of the scalar type.
    pub fn tolerance() -> T {
        T::epsilon().sqrt()
    }

    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("probability vector"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::format(
                "probability vector",
                "entries must be finite and non-negative",
            ));
        }
        let total: T = values.iter().copied().sum();
        if (total - T::one()).abs() > Self::tolerance() {
            return Err(Error::format(
                "probability vector",
                format!("entries sum to {total}, expected 1"),
            ));
        }
        Ok(ProbVector(values))
    }

    /// Uniform distribution over `n` classes.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "need at least one class");
        ProbVector(vec![T::one() / from_usize::<T>(n); n])
    }

    /// Normalizes non-negative scores; falls back to uniform when they sum to zero.
    pub fn from_scores(scores: Vec<T>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Empty("probability scores"));
        }
        if scores.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::NonFinite("probability scores"));
        }
        let total: T = scores.iter().copied().sum();
        if total <= T::zero() {
            return Ok(Self::uniform(scores.len()));
        }
        Ok(ProbVector(scores.into_iter().map(|s| s / total).collect()))
    }

    /// Element-wise mean of equally long probability vectors.
    pub fn mean(items: &[ProbVector<T>]) -> Result<Self> {
        let first = items.first().ok_or(Error::Empty("probability mean"))?;
        let n = first.len();
        let mut acc = vec![T::zero(); n];
        for p in items {
            if p.len() != n {
                return Err(Error::shape(
                    "probability mean",
                    format!("lengths {n} and {}", p.len()),
                ));
            }
            for (a, &v) in acc.iter_mut().zip(p.as_slice()) {
                *a += v;
            }
        }
        let count = from_usize::<T>(items.len());
        Ok(ProbVector(acc.into_iter().map(|v| v / count).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn get(&self, i: usize) -> T {
        self.0[i]
    }

    /// Index of the most probable class; see [`argmax_decision`].
    pub fn decision(&self) -> usize {
        argmax(&self.0)
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for ProbVector<T> {
    type Error = Error;

    fn try_from(v: Vec<T>) -> Result<Self> {
        ProbVector::new(v)
    }
}

impl<T: Scalar> From<ProbVector<T>> for Vec<T> {
    fn from(p: ProbVector<T>) -> Vec<T> {
        p.0
    }
}

/// Numerically stable softmax of a rank-1 logit tensor.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<ProbVector<T>> {
    if logits.rank() != 1 {
        return Err(Error::shape(
            "softmax",
            format!("expected rank-1 logits, got shape {:?}", logits.shape()),
        ));
    }
    softmax_slice(logits.data())
}

pub fn softmax_slice<T: Scalar>(logits: &[T]) -> Result<ProbVector<T>> {
    if logits.is_empty() {
        return Err(Error::Empty("softmax"));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("softmax logits"));
    }
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    Ok(ProbVector(exps.into_iter().map(|e| e / total).collect()))
}

/// Lowest index attaining the maximum.
pub fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Class decision from a probability vector; ties go to the lowest index.
pub fn argmax_decision<T: Scalar>(probs: &ProbVector<T>) -> usize {
    argmax(probs.as_slice())
}

/// Cross-entropy of `probs` against class `label`, with its gradient with
/// respect to the logits that produced `probs`.
pub fn cross_entropy_with_grad<T: Scalar>(probs: &ProbVector<T>, label: usize) -> (T, Vec<T>) {
    let p = probs.get(label).max(T::min_positive_value());
    let mut grad = probs.as_slice().to_vec();
    grad[label] -= T::one();
    (-p.ln(), grad)
}
