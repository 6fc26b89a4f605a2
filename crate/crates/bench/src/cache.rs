//! Per-modality probabilities of the held-out split, saved by `eval` so
//! that `sweep-alpha` can re-fuse without touching the networks.

use serde::{Deserialize, Serialize};

use mmrec_core::ProbVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityCache {
    pub ids: Vec<String>,
    pub labels: Vec<usize>,
    pub rgb: Vec<ProbVector<f64>>,
    pub skeleton: Vec<ProbVector<f64>>,
    pub svm: Vec<ProbVector<f64>>,
    /// Voice detector `P(special)` per video when audio is enabled.
    #[serde(default)]
    pub audio_special: Option<Vec<f64>>,
    /// Fusion weight chosen on the training split.
    pub alpha: f64,
    pub svm_weight: f64,
    pub special_class: usize,
}

impl ProbabilityCache {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
