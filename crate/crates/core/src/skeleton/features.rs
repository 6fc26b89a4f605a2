//! Spine-relative joint coordinates, pairwise joint distances and windowing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Kinect v1 joint count.
pub const DEFAULT_JOINTS: usize = 20;
/// Kinect v1 `Spine` joint.
pub const DEFAULT_SPINE_INDEX: usize = 1;
/// Kinect v1 `Head` joint.
pub const DEFAULT_HEAD_INDEX: usize = 3;

/// `T x J x 3` joint coordinates in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSequence<T = f64> {
    frames: Tensor<T>,
    spine_index: usize,
    head_index: usize,
}

impl<T: Scalar> SkeletonSequence<T> {
    pub fn new(frames: Tensor<T>, spine_index: usize, head_index: usize) -> Result<Self> {
        if frames.rank() != 3 || frames.shape()[2] != 3 {
            return Err(Error::shape(
                "skeleton",
                format!("expected [T, J, 3] coordinates, got {:?}", frames.shape()),
            ));
        }
        let joints = frames.shape()[1];
        if spine_index >= joints || head_index >= joints {
            return Err(Error::InvalidConfig(format!(
                "spine index {spine_index} / head index {head_index} out of range for {joints} joints"
            )));
        }
        frames.ensure_finite("skeleton coordinates")?;
        Ok(SkeletonSequence {
            frames,
            spine_index,
            head_index,
        })
    }

    pub fn frames(&self) -> &Tensor<T> {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.shape()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn joints(&self) -> usize {
        self.frames.shape()[1]
    }

    pub fn spine_index(&self) -> usize {
        self.spine_index
    }

    pub fn head_index(&self) -> usize {
        self.head_index
    }

    fn joint(&self, t: usize, j: usize) -> [T; 3] {
        let base = (t * self.joints() + j) * 3;
        let d = self.frames.data();
        [d[base], d[base + 1], d[base + 2]]
    }
}

/// Which per-frame feature groups to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub relative_coords: bool,
    pub pairwise_distances: bool,
}

impl Default for FeatureSet {
    fn default() -> Self {
        FeatureSet {
            relative_coords: true,
            pairwise_distances: true,
        }
    }
}

impl FeatureSet {
    pub fn width(&self, joints: usize) -> usize {
        let mut w = 0;
        if self.relative_coords {
            w += 3 * joints;
        }
        if self.pairwise_distances {
            w += joints * (joints - 1) / 2;
        }
        w
    }
}

/// Per-frame feature rows `[T, F]` plus the normalization scale applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFeatures<T = f64> {
    pub frames: Tensor<T>,
    pub scale: T,
}

impl<T: Scalar> SkeletonFeatures<T> {
    pub fn len(&self) -> usize {
        self.frames.shape()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.frames.shape()[1]
    }

    pub fn row(&self, t: usize) -> &[T] {
        let w = self.width();
        &self.frames.data()[t * w..(t + 1) * w]
    }
}

fn median<T: Scalar>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::of(2.0)
    }
}

fn distance<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Both feature groups; see [`preprocess_skeleton_with`].
pub fn preprocess_skeleton<T: Scalar>(seq: &SkeletonSequence<T>) -> Result<SkeletonFeatures<T>> {
    preprocess_skeleton_with(seq, FeatureSet::default())
}

/// Per frame: every joint minus the spine joint (`3J` values), then every
/// pairwise joint distance for `i < j` in lexicographic order
/// (`J(J-1)/2` values). Both groups are divided by the median spine-to-head
/// distance over the sequence.
pub fn preprocess_skeleton_with<T: Scalar>(seq: &SkeletonSequence<T>, set: FeatureSet) -> Result<SkeletonFeatures<T>> {
    if seq.is_empty() {
        return Err(Error::Empty("skeleton sequence"));
    }
    if !set.relative_coords && !set.pairwise_distances {
        return Err(Error::InvalidConfig("at least one skeleton feature group is required".into()));
    }
    let (n, joints) = (seq.len(), seq.joints());
    let scale = median(
        (0..n)
            .map(|t| distance(seq.joint(t, seq.head_index), seq.joint(t, seq.spine_index)))
            .collect(),
    );
    if scale.is_nan() || scale <= T::zero() {
        return Err(Error::DegenerateSkeleton);
    }
    let width = set.width(joints);
    let mut data = Vec::with_capacity(n * width);
    let mut coords = vec![[T::zero(); 3]; joints];
    for t in 0..n {
        for (j, c) in coords.iter_mut().enumerate() {
            *c = seq.joint(t, j);
        }
        if set.relative_coords {
            let spine = coords[seq.spine_index];
            for c in &coords {
                for k in 0..3 {
                    data.push((c[k] - spine[k]) / scale);
                }
            }
        }
        if set.pairwise_distances {
            for i in 0..joints {
                for j in i + 1..joints {
                    data.push(distance(coords[i], coords[j]) / scale);
                }
            }
        }
    }
    Ok(SkeletonFeatures {
        frames: Tensor::from_vec(vec![n, width], data)?,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowingConfig {
    pub window_len: usize,
    pub overlap: usize,
}

impl Default for WindowingConfig {
    fn default() -> Self {
        WindowingConfig {
            window_len: 256,
            overlap: 128,
        }
    }
}

impl WindowingConfig {
    pub fn new(window_len: usize, overlap: usize) -> Result<Self> {
        let cfg = WindowingConfig { window_len, overlap };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len == 0 || self.overlap >= self.window_len {
            return Err(Error::InvalidConfig(format!(
                "window_len must be positive and overlap < window_len, got {} / {}",
                self.window_len, self.overlap
            )));
        }
        Ok(())
    }

    pub fn hop(&self) -> usize {
        self.window_len - self.overlap
    }

    /// Number of windows for a sequence of `frames` frames.
    pub fn window_count(&self, frames: usize) -> usize {
        if frames <= self.window_len {
            1
        } else {
            (frames - self.window_len).div_ceil(self.hop()) + 1
        }
    }
}

/// Splits features into `[window_len, F]` windows starting every `hop`
/// frames; frames past the end repeat the last frame.
pub fn window_sequence<T: Scalar>(features: &SkeletonFeatures<T>, cfg: &WindowingConfig) -> Result<Vec<Tensor<T>>> {
    cfg.validate()?;
    (0..cfg.window_count(features.len())).map(|k| window_at(features, cfg, k)).collect()
}

/// The `k`-th window of [`window_sequence`].
pub fn window_at<T: Scalar>(features: &SkeletonFeatures<T>, cfg: &WindowingConfig, k: usize) -> Result<Tensor<T>> {
    cfg.validate()?;
    let (n, w) = (features.len(), features.width());
    if k >= cfg.window_count(n) {
        return Err(Error::shape(
            "skeleton window",
            format!("window {k} of {} requested", cfg.window_count(n)),
        ));
    }
    let start = k * cfg.hop();
    let mut data = Vec::with_capacity(cfg.window_len * w);
    for t in start..start + cfg.window_len {
        data.extend_from_slice(features.row(t.min(n - 1)));
    }
    Tensor::from_vec(vec![cfg.window_len, w], data)
}
