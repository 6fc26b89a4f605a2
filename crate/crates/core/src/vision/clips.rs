use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Frames per clip.
pub const CLIP_LEN: usize = 16;

/// A `[16, C, H, W]` block of frames with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RgbClip<T = f64>(Tensor<T>);

impl<T: Scalar> RgbClip<T> {
    /// Validates the shape and clamps values into `[0, 1]`.
    pub fn new(frames: Tensor<T>) -> Result<Self> {
        if frames.rank() != 4 || frames.shape()[0] != CLIP_LEN {
            return Err(Error::shape(
                "rgb clip",
                format!("expected [{CLIP_LEN}, C, H, W], got {:?}", frames.shape()),
            ));
        }
        frames.ensure_finite("rgb clip")?;
        Ok(RgbClip(frames.map(|v| v.max(T::zero()).min(T::one()))))
    }

    pub fn tensor(&self) -> &Tensor<T> {
        &self.0
    }

    pub fn channels(&self) -> usize {
        self.0.shape()[1]
    }

    pub fn height(&self) -> usize {
        self.0.shape()[2]
    }

    pub fn width(&self) -> usize {
        self.0.shape()[3]
    }

    /// Reorders `[T, C, H, W]` into the `[C, T, H, W]` layout 3-D convolution consumes.
    pub fn channels_first(&self) -> Tensor<T> {
        let s = self.0.shape();
        let (t, c, hw) = (s[0], s[1], s[2] * s[3]);
        let src = self.0.data();
        let mut out = Vec::with_capacity(src.len());
        for ci in 0..c {
            for ti in 0..t {
                let base = (ti * c + ci) * hw;
                out.extend_from_slice(&src[base..base + hw]);
            }
        }
        Tensor::from_vec(vec![c, t, s[2], s[3]], out).expect("same element count")
    }
}

fn check_video<T: Scalar>(video: &Tensor<T>) -> Result<usize> {
    if video.rank() != 4 {
        return Err(Error::shape(
            "video",
            format!("expected [T, C, H, W], got {:?}", video.shape()),
        ));
    }
    let t = video.shape()[0];
    if t < CLIP_LEN {
        return Err(Error::TooShort {
            context: "video frame count",
            needed: CLIP_LEN,
            got: t,
        });
    }
    Ok(t)
}

/// The clip of 16 consecutive frames starting at `start`.
pub fn clip_at<T: Scalar>(video: &Tensor<T>, start: usize) -> Result<RgbClip<T>> {
    let t = check_video(video)?;
    if start + CLIP_LEN > t {
        return Err(Error::shape(
            "video",
            format!("clip starting at {start} overruns {t} frames"),
        ));
    }
    let frame = video.len() / t;
    let data = video.data()[start * frame..(start + CLIP_LEN) * frame].to_vec();
    let mut shape = video.shape().to_vec();
    shape[0] = CLIP_LEN;
    RgbClip::new(Tensor::from_vec(shape, data)?)
}

/// All 16-frame windows with stride 1: `T - 15` clips, in order.
pub fn video_to_clips<T: Scalar>(video: &Tensor<T>) -> Result<Vec<RgbClip<T>>> {
    let t = check_video(video)?;
    (0..=t - CLIP_LEN).map(|s| clip_at(video, s)).collect()
}

/// Start frames of every `stride`-th clip of [`video_to_clips`].
pub fn clip_starts(frames: usize, stride: usize) -> Vec<usize> {
    if frames < CLIP_LEN || stride == 0 {
        return Vec::new();
    }
    (0..=frames - CLIP_LEN).step_by(stride).collect()
}
