//! Flat `key = value` configuration for the harness.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected. The config hash is the SHA-256 of the canonical rendering
//! ([`HarnessConfig::to_text`]), truncated to 16 hex digits.

use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::sweep::AlphaGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub seed: u64,
    pub videos: usize,
    pub audio: bool,
    /// Held-out split, 1..=4.
    pub holdout: usize,
    pub epochs: usize,
    pub batch: usize,
    pub vision_lr: f64,
    pub skeleton_lr: f64,
    pub l2: f64,
    pub grad_clip: f64,
    /// Random training clips drawn per video per epoch.
    pub clips_per_video: usize,
    /// Evaluation averages every n-th 16-frame clip.
    pub eval_clip_stride: usize,
    pub window_len: usize,
    pub window_overlap: usize,
    /// Trailing steps of each window that receive gradient; 0 = all.
    pub bptt_limit: usize,
    pub svm_epochs: usize,
    pub svm_lr: f64,
    pub svm_lambda: f64,
    /// Weight of the SVM probabilities in the final re-fusion.
    pub svm_weight: f64,
    pub alpha_grid: AlphaGrid,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: 42,
            videos: 386,
            audio: false,
            holdout: 4,
            epochs: 30,
            batch: 8,
            vision_lr: 0.05,
            skeleton_lr: 0.05,
            l2: 1e-5,
            grad_clip: 5.0,
            clips_per_video: 1,
            eval_clip_stride: 16,
            window_len: 256,
            window_overlap: 128,
            bptt_limit: 32,
            svm_epochs: 2000,
            svm_lr: 0.01,
            svm_lambda: 0.001,
            svm_weight: 0.5,
            alpha_grid: AlphaGrid::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse {value:?}")))
}

impl HarnessConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = HarnessConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse(key, v)?,
            "videos" => self.videos = parse(key, v)?,
            "audio" => self.audio = parse(key, v)?,
            "holdout" => self.holdout = parse(key, v)?,
            "epochs" => self.epochs = parse(key, v)?,
            "batch" => self.batch = parse(key, v)?,
            "vision_lr" => self.vision_lr = parse(key, v)?,
            "skeleton_lr" => self.skeleton_lr = parse(key, v)?,
            "l2" => self.l2 = parse(key, v)?,
            "grad_clip" => self.grad_clip = parse(key, v)?,
            "clips_per_video" => self.clips_per_video = parse(key, v)?,
            "eval_clip_stride" => self.eval_clip_stride = parse(key, v)?,
            "window_len" => self.window_len = parse(key, v)?,
            "window_overlap" => self.window_overlap = parse(key, v)?,
            "bptt_limit" => self.bptt_limit = parse(key, v)?,
            "svm_epochs" => self.svm_epochs = parse(key, v)?,
            "svm_lr" => self.svm_lr = parse(key, v)?,
            "svm_lambda" => self.svm_lambda = parse(key, v)?,
            "svm_weight" => self.svm_weight = parse(key, v)?,
            "alpha_grid" => self.alpha_grid = v.parse()?,
            _ => return Err(HarnessError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.videos < 7 * 4 * 2 {
            return bad("videos must be at least 56 so every split holds two videos per class");
        }
        if !(1..=4).contains(&self.holdout) {
            return bad("holdout must be a split number in 1..=4");
        }
        if self.batch == 0 || self.clips_per_video == 0 || self.eval_clip_stride == 0 {
            return bad("batch, clips_per_video and eval_clip_stride must be positive");
        }
        for (name, v) in [
            ("vision_lr", self.vision_lr),
            ("skeleton_lr", self.skeleton_lr),
            ("svm_lr", self.svm_lr),
            ("grad_clip", self.grad_clip),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(self.l2 >= 0.0 && self.svm_lambda >= 0.0) {
            return bad("l2 and svm_lambda must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.svm_weight) {
            return bad("svm_weight must lie in [0, 1]");
        }
        if self.window_len == 0 || self.window_overlap >= self.window_len {
            return bad("window_overlap must be smaller than a positive window_len");
        }
        Ok(())
    }

    /// Canonical `key = value` rendering, one key per line in fixed order.
    pub fn to_text(&self) -> String {
        let pairs: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("videos", self.videos.to_string()),
            ("audio", self.audio.to_string()),
            ("holdout", self.holdout.to_string()),
            ("epochs", self.epochs.to_string()),
            ("batch", self.batch.to_string()),
            ("vision_lr", self.vision_lr.to_string()),
            ("skeleton_lr", self.skeleton_lr.to_string()),
            ("l2", self.l2.to_string()),
            ("grad_clip", self.grad_clip.to_string()),
            ("clips_per_video", self.clips_per_video.to_string()),
            ("eval_clip_stride", self.eval_clip_stride.to_string()),
            ("window_len", self.window_len.to_string()),
            ("window_overlap", self.window_overlap.to_string()),
            ("bptt_limit", self.bptt_limit.to_string()),
            ("svm_epochs", self.svm_epochs.to_string()),
            ("svm_lr", self.svm_lr.to_string()),
            ("svm_lambda", self.svm_lambda.to_string()),
            ("svm_weight", self.svm_weight.to_string()),
            ("alpha_grid", self.alpha_grid.to_string()),
        ];
        pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
