//! Binary special-voice detector on mean log mel energies.

use serde::{Deserialize, Serialize};

use super::filterbank::{mel_features, MelFilterbank};
use super::frames::{AudioSignal, FrameSpec};
use crate::error::{Error, Result};
use crate::kernels::{
    apply_sgd, cross_entropy_with_grad, softmax_slice, ActivationKind, Dense, DenseGrads, ProbVector,
    SgdConfig,
};
use crate::scalar::{from_usize, Scalar};

/// Probability index of the "special" class; index 1 is "not special".
pub const SPECIAL: usize = 0;

/// `detected` is `prob(special) >= threshold`.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Standardizes the feature vector, then dense + softmax over two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AudioHead<T = f64> {
    pub offset: Vec<T>,
    pub scale: Vec<T>,
    pub dense: Dense<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioDetection<T = f64> {
    pub probs: ProbVector<T>,
    pub detected: bool,
}

impl<T: Scalar> AudioHead<T> {
    pub fn zeros(n_features: usize) -> Self {
        AudioHead {
            offset: vec![T::zero(); n_features],
            scale: vec![T::one(); n_features],
            dense: Dense::zeros(n_features, 2, ActivationKind::Identity),
        }
    }

    pub fn inputs(&self) -> usize {
        self.dense.inputs()
    }

    fn standardize(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.inputs() {
            return Err(Error::shape(
                "audio head",
                format!("feature length {} != head input {}", x.len(), self.inputs()),
            ));
        }
        Ok(x.iter()
            .zip(&self.offset)
            .zip(&self.scale)
            .map(|((&v, &o), &s)| (v - o) / s)
            .collect())
    }

    pub fn probs(&self, features: &[T]) -> Result<ProbVector<T>> {
        softmax_slice(&self.dense.forward(&self.standardize(features)?)?)
    }

    /// Full-batch gradient descent on mean cross-entropy. Standardization
    /// statistics are taken from `features` first. Returns the final loss.
    pub fn fit(&mut self, features: &[Vec<T>], special: &[bool], epochs: usize, sgd: &SgdConfig) -> Result<T> {
        sgd.validate()?;
        if features.is_empty() || features.len() != special.len() {
            return Err(Error::InsufficientData(format!(
                "{} feature vectors for {} labels",
                features.len(),
                special.len()
            )));
        }
        let n = from_usize::<T>(features.len());
        for j in 0..self.inputs() {
            let col = features.iter().map(|f| f.get(j).copied().unwrap_or(T::zero()));
            let mean = col.clone().fold(T::zero(), |a, v| a + v) / n;
            let var = col.fold(T::zero(), |a, v| a + (v - mean) * (v - mean)) / n;
            self.offset[j] = mean;
            self.scale[j] = if var > T::zero() { var.sqrt() } else { T::one() };
        }
        let xs = features.iter().map(|f| self.standardize(f)).collect::<Result<Vec<_>>>()?;
        let mut loss = T::zero();
        for epoch in 0..=epochs {
            let mut grads = DenseGrads::zeros_like(&self.dense);
            loss = T::zero();
            for (x, &s) in xs.iter().zip(special) {
                let logits = self.dense.forward(x)?;
                let (l, dz) = cross_entropy_with_grad(&softmax_slice(&logits)?, if s { SPECIAL } else { 1 - SPECIAL });
                loss += l;
                self.dense.backward(x, &logits, &dz, &mut grads);
            }
            if epoch == epochs {
                break;
            }
            apply_sgd(&mut self.dense, &grads, T::one() / n, sgd)?;
        }
        Ok(loss / n)
    }
}

/// Frames the signal, averages log mel energies over frames and runs the head.
pub fn audio_recognize<T: Scalar>(
    signal: &AudioSignal<T>,
    spec: &FrameSpec,
    bank: &MelFilterbank<T>,
    head: &AudioHead<T>,
    threshold: T,
) -> Result<AudioDetection<T>> {
    let features = mel_features(signal, spec, bank)?.mean();
    let probs = head.probs(&features)?;
    let detected = probs.get(SPECIAL) >= threshold;
    Ok(AudioDetection { probs, detected })
}
