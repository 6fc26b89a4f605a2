//! Image/voice mutual verification for special-pedestrian handling.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionOutcome {
    /// Both detectors agree on a special pedestrian: give way.
    Yield,
    /// Seen but not heard: not engaged in special work, no need to give way.
    NoYield,
    /// Heard but not seen: a human has to decide.
    HumanReview,
    /// Neither detector fired.
    NoPedestrian,
}

impl FusionOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionOutcome::Yield => "yield",
            FusionOutcome::NoYield => "no-yield",
            FusionOutcome::HumanReview => "human-review",
            FusionOutcome::NoPedestrian => "no-pedestrian",
        }
    }
}

impl std::fmt::Display for FusionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionDecision {
    pub outcome: FusionOutcome,
    pub image_detected: bool,
    pub voice_detected: bool,
}

pub fn decision_fusion(image_detected: bool, voice_detected: bool) -> FusionDecision {
    let outcome = match (image_detected, voice_detected) {
        (true, true) => FusionOutcome::Yield,
        (true, false) => FusionOutcome::NoYield,
        (false, true) => FusionOutcome::HumanReview,
        (false, false) => FusionOutcome::NoPedestrian,
    };
    FusionDecision {
        outcome,
        image_detected,
        voice_detected,
    }
}

/// Detector verdict from a binary-head probability; the threshold is inclusive.
pub fn detected(prob: f64, threshold: f64) -> bool {
    prob >= threshold
}
