//! Small 3-D ConvNet over 16-frame clips.
//!
//! ```text
//! clip [C,16,H,W] -> conv3d 3x3x3 relu -> conv3d 3x3x3 relu
//!   -> mean over (H, W) -> fc6 relu -> fc7 relu -> fc8 -> softmax
//! ```
//!
//! An auxiliary head reads the first conv block (mean over T, H, W, then a
//! linear layer and softmax); its loss is added with `aux_weight` while
//! training.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::clips::{clip_at, clip_starts, RgbClip, CLIP_LEN};
use crate::error::{Error, Result};
use crate::kernels::conv::conv_backward_impl;
use crate::kernels::{
    conv_forward, cross_entropy_with_grad, softmax_slice, ActivationKind, ConvGrads, ConvSpec, Dense, DenseGrads,
    Parameterized, ProbVector,
};
use crate::scalar::{from_usize, Scalar};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisionConfig {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub conv1_channels: usize,
    pub conv2_channels: usize,
    pub fc6: usize,
    pub fc7: usize,
    pub classes: usize,
    pub aux_weight: f64,
}

impl Default for VisionConfig {
    fn default() -> Self {
        VisionConfig {
            channels: 3,
            height: 8,
            width: 8,
            conv1_channels: 4,
            conv2_channels: 8,
            fc6: 64,
            fc7: 32,
            classes: 7,
            aux_weight: 0.3,
        }
    }
}

const KERNEL: [usize; 3] = [3, 3, 3];

impl VisionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.height < 5 || self.width < 5 {
            return Err(Error::InvalidConfig(format!(
                "frames must be at least 5x5 for two 3x3x3 blocks, got {}x{}",
                self.height, self.width
            )));
        }
        let sizes = [self.channels, self.conv1_channels, self.conv2_channels, self.fc6, self.fc7];
        if sizes.contains(&0) || self.classes < 2 {
            return Err(Error::InvalidConfig("layer sizes must be positive and classes >= 2".into()));
        }
        if !(self.aux_weight >= 0.0 && self.aux_weight.is_finite()) {
            return Err(Error::InvalidConfig("aux_weight must be non-negative".into()));
        }
        Ok(())
    }

    /// Temporal extent after both conv blocks.
    fn pooled_frames(&self) -> usize {
        CLIP_LEN - 4
    }

    fn fc6_inputs(&self) -> usize {
        self.conv2_channels * self.pooled_frames()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VisionNet<T = f64> {
    pub config: VisionConfig,
    pub conv1: ConvSpec<T>,
    pub conv2: ConvSpec<T>,
    pub fc6: Dense<T>,
    pub fc7: Dense<T>,
    pub fc8: Dense<T>,
    pub aux: Dense<T>,
}

/// Fully-connected activations and class probabilities for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipFeatures<T = f64> {
    pub fc6: Tensor<T>,
    pub fc7: Tensor<T>,
    pub fc8: Tensor<T>,
    pub probs: ProbVector<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxClassifierOutput<T = f64> {
    pub probs: ProbVector<T>,
}

/// Per-video aggregate over sampled clips.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoFeatures<T = f64> {
    /// Mean of the per-clip probabilities.
    pub probs: ProbVector<T>,
    /// Mean of the per-clip fc7 activations.
    pub fc7: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisionGrads<T = f64> {
    pub conv1: ConvGrads<T>,
    pub conv2: ConvGrads<T>,
    pub fc6: DenseGrads<T>,
    pub fc7: DenseGrads<T>,
    pub fc8: DenseGrads<T>,
    pub aux: DenseGrads<T>,
}

struct Trace<T> {
    input: Tensor<T>,
    a1: Tensor<T>,
    a2: Tensor<T>,
    pooled: Vec<T>,
    aux_pooled: Vec<T>,
    fc6: Vec<T>,
    fc7: Vec<T>,
    fc8: Vec<T>,
    aux_logits: Vec<T>,
}

fn zero_conv<T: Scalar>(cin: usize, cout: usize) -> ConvSpec<T> {
    let mut shape = vec![cout, cin];
    shape.extend_from_slice(&KERNEL);
    ConvSpec::simple(Tensor::zeros(&shape), ActivationKind::Relu).expect("static conv shape")
}

/// Mean over the trailing `inner` elements of each leading row.
fn mean_rows<T: Scalar>(data: &[T], inner: usize) -> Vec<T> {
    let n = from_usize::<T>(inner);
    data.chunks_exact(inner).map(|row| row.iter().copied().sum::<T>() / n).collect()
}

impl<T: Scalar> VisionNet<T> {
    /// All weights and biases zero; every input maps to the uniform distribution.
    pub fn zeros(config: VisionConfig) -> Result<Self> {
        config.validate()?;
        let c = &config;
        Ok(VisionNet {
            conv1: zero_conv(c.channels, c.conv1_channels),
            conv2: zero_conv(c.conv1_channels, c.conv2_channels),
            fc6: Dense::zeros(c.fc6_inputs(), c.fc6, ActivationKind::Relu),
            fc7: Dense::zeros(c.fc6, c.fc7, ActivationKind::Relu),
            fc8: Dense::zeros(c.fc7, c.classes, ActivationKind::Identity),
            aux: Dense::zeros(c.conv1_channels, c.classes, ActivationKind::Identity),
            config,
        })
    }

    pub fn init(config: VisionConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &config;
        Ok(VisionNet {
            conv1: ConvSpec::init(c.channels, c.conv1_channels, &KERNEL, ActivationKind::Relu, &mut rng)?,
            conv2: ConvSpec::init(c.conv1_channels, c.conv2_channels, &KERNEL, ActivationKind::Relu, &mut rng)?,
            fc6: Dense::init(c.fc6_inputs(), c.fc6, ActivationKind::Relu, &mut rng),
            fc7: Dense::init(c.fc6, c.fc7, ActivationKind::Relu, &mut rng),
            fc8: Dense::init(c.fc7, c.classes, ActivationKind::Identity, &mut rng),
            aux: Dense::init(c.conv1_channels, c.classes, ActivationKind::Identity, &mut rng),
            config,
        })
    }

    fn check_clip(&self, clip: &RgbClip<T>) -> Result<()> {
        let c = &self.config;
        if clip.channels() != c.channels || clip.height() != c.height || clip.width() != c.width {
            return Err(Error::shape(
                "vision net",
                format!(
                    "clip is {}x{}x{} (C x H x W), network expects {}x{}x{}",
                    clip.channels(),
                    clip.height(),
                    clip.width(),
                    c.channels,
                    c.height,
                    c.width
                ),
            ));
        }
        Ok(())
    }

    fn trace(&self, clip: &RgbClip<T>) -> Result<Trace<T>> {
        self.check_clip(clip)?;
        let input = clip.channels_first();
        let a1 = conv_forward(&input, &self.conv1)?;
        let a2 = conv_forward(&a1, &self.conv2)?;
        let s2 = a2.shape();
        let pooled = mean_rows(a2.data(), s2[2] * s2[3]);
        let s1 = a1.shape();
        let aux_pooled = mean_rows(a1.data(), s1[1] * s1[2] * s1[3]);
        let fc6 = self.fc6.forward(&pooled)?;
        let fc7 = self.fc7.forward(&fc6)?;
        let fc8 = self.fc8.forward(&fc7)?;
        let aux_logits = self.aux.forward(&aux_pooled)?;
        Ok(Trace {
            input,
            a1,
            a2,
            pooled,
            aux_pooled,
            fc6,
            fc7,
            fc8,
            aux_logits,
        })
    }

    pub fn forward(&self, clip: &RgbClip<T>) -> Result<(ClipFeatures<T>, AuxClassifierOutput<T>)> {
        let t = self.trace(clip)?;
        let probs = softmax_slice(&t.fc8)?;
        let aux = AuxClassifierOutput {
            probs: softmax_slice(&t.aux_logits)?,
        };
        Ok((
            ClipFeatures {
                fc6: Tensor::vector(t.fc6),
                fc7: Tensor::vector(t.fc7),
                fc8: Tensor::vector(t.fc8),
                probs,
            },
            aux,
        ))
    }

    /// Cross-entropy of the main head plus `aux_weight` times that of the
    /// auxiliary head, with gradients for every parameter.
    pub fn loss_and_grads(&self, clip: &RgbClip<T>, label: usize) -> Result<(T, VisionGrads<T>)> {
        if label >= self.config.classes {
            return Err(Error::InvalidConfig(format!("label {label} out of range")));
        }
        let t = self.trace(clip)?;
        let aux_w = T::of(self.config.aux_weight);
        let mut g = VisionGrads::zeros_like(self);

        let (main_loss, d8) = cross_entropy_with_grad(&softmax_slice(&t.fc8)?, label);
        let (aux_loss, daux) = cross_entropy_with_grad(&softmax_slice(&t.aux_logits)?, label);
        let daux: Vec<T> = daux.into_iter().map(|v| v * aux_w).collect();

        let d7 = self.fc8.backward(&t.fc7, &t.fc8, &d8, &mut g.fc8);
        let d6 = self.fc7.backward(&t.fc6, &t.fc7, &d7, &mut g.fc7);
        let dpool = self.fc6.backward(&t.pooled, &t.fc6, &d6, &mut g.fc6);
        let daux_pool = self.aux.backward(&t.aux_pooled, &t.aux_logits, &daux, &mut g.aux);

        let s2 = t.a2.shape();
        let plane = s2[2] * s2[3];
        let inv = T::one() / from_usize::<T>(plane);
        let da2: Vec<T> = dpool.iter().flat_map(|&d| std::iter::repeat_n(d * inv, plane)).collect();
        let da2 = Tensor::from_vec(s2.to_vec(), da2)?;
        g.conv2 = conv_backward_impl(&t.a1, &self.conv2, &t.a2, &da2, true)?;

        let mut da1 = std::mem::replace(&mut g.conv2.input, Tensor::zeros(&[1]));
        let vol = t.a1.len() / t.a1.shape()[0];
        let inv = T::one() / from_usize::<T>(vol);
        for (c, chunk) in da1.data_mut().chunks_exact_mut(vol).enumerate() {
            let d = daux_pool[c] * inv;
            for v in chunk {
                *v += d;
            }
        }
        g.conv1 = conv_backward_impl(&t.input, &self.conv1, &t.a1, &da1, false)?;
        Ok((main_loss + aux_w * aux_loss, g))
    }

    /// Averages clip probabilities and fc7 activations over every
    /// `clip_stride`-th 16-frame window of a `[T, C, H, W]` video.
    pub fn video_features(&self, video: &Tensor<T>, clip_stride: usize) -> Result<VideoFeatures<T>> {
        let t = video.shape().first().copied().unwrap_or(0);
        let starts = clip_starts(t, clip_stride.max(1));
        if starts.is_empty() {
            return Err(Error::TooShort {
                context: "video frame count",
                needed: CLIP_LEN,
                got: t,
            });
        }
        let mut probs = Vec::with_capacity(starts.len());
        let mut fc7 = vec![T::zero(); self.config.fc7];
        for &s in &starts {
            let (f, _) = self.forward(&clip_at(video, s)?)?;
            for (acc, &v) in fc7.iter_mut().zip(f.fc7.data()) {
                *acc += v;
            }
            probs.push(f.probs);
        }
        let n = from_usize::<T>(starts.len());
        fc7.iter_mut().for_each(|v| *v /= n);
        Ok(VideoFeatures {
            probs: ProbVector::mean(&probs)?,
            fc7,
        })
    }
}

/// Forward pass of `net` on one clip.
pub fn rgb_clip_features<T: Scalar>(clip: &RgbClip<T>, net: &VisionNet<T>) -> Result<ClipFeatures<T>> {
    net.forward(clip).map(|(f, _)| f)
}

impl<T: Scalar> VisionGrads<T> {
    pub fn zeros_like(net: &VisionNet<T>) -> Self {
        let conv = |s: &ConvSpec<T>| ConvGrads {
            input: Tensor::zeros(&[1]),
            kernel: Tensor::zeros(s.kernel.shape()),
            bias: vec![T::zero(); s.bias.len()],
        };
        VisionGrads {
            conv1: conv(&net.conv1),
            conv2: conv(&net.conv2),
            fc6: DenseGrads::zeros_like(&net.fc6),
            fc7: DenseGrads::zeros_like(&net.fc7),
            fc8: DenseGrads::zeros_like(&net.fc8),
            aux: DenseGrads::zeros_like(&net.aux),
        }
    }
}

impl<T: Scalar> Parameterized<T> for VisionNet<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        let mut v = self.conv1.param_slices();
        v.extend(self.conv2.param_slices());
        v.extend(self.fc6.param_slices());
        v.extend(self.fc7.param_slices());
        v.extend(self.fc8.param_slices());
        v.extend(self.aux.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = self.conv1.param_slices_mut();
        v.extend(self.conv2.param_slices_mut());
        v.extend(self.fc6.param_slices_mut());
        v.extend(self.fc7.param_slices_mut());
        v.extend(self.fc8.param_slices_mut());
        v.extend(self.aux.param_slices_mut());
        v
    }
}

impl<T: Scalar> Parameterized<T> for VisionGrads<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        let mut v = self.conv1.param_slices();
        v.extend(self.conv2.param_slices());
        v.extend(self.fc6.param_slices());
        v.extend(self.fc7.param_slices());
        v.extend(self.fc8.param_slices());
        v.extend(self.aux.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = self.conv1.param_slices_mut();
        v.extend(self.conv2.param_slices_mut());
        v.extend(self.fc6.param_slices_mut());
        v.extend(self.fc7.param_slices_mut());
        v.extend(self.fc8.param_slices_mut());
        v.extend(self.aux.param_slices_mut());
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_net_zero_clip_is_uniform() {
        let net = VisionNet::<f64>::zeros(VisionConfig::default()).unwrap();
        let clip = RgbClip::new(Tensor::zeros(&[16, 3, 8, 8])).unwrap();
        let f = rgb_clip_features(&clip, &net).unwrap();
        for &p in f.probs.as_slice() {
            assert!((p - 1.0 / 7.0).abs() < 1e-15);
        }
    }

    #[test]
    fn feature_lengths_follow_config() {
        let cfg = VisionConfig {
            fc6: 10,
            fc7: 6,
            ..VisionConfig::default()
        };
        let net = VisionNet::<f64>::init(cfg, 4).unwrap();
        let clip = RgbClip::new(Tensor::full(&[16, 3, 8, 8], 0.5)).unwrap();
        let (f, aux) = net.forward(&clip).unwrap();
        assert_eq!((f.fc6.len(), f.fc7.len(), f.fc8.len()), (10, 6, 7));
        assert_eq!(aux.probs.len(), 7);
    }

    #[test]
    fn mismatched_clip_rejected() {
        let net = VisionNet::<f64>::zeros(VisionConfig::default()).unwrap();
        let clip = RgbClip::new(Tensor::zeros(&[16, 1, 8, 8])).unwrap();
        assert!(matches!(rgb_clip_features(&clip, &net), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn config_validation() {
        let bad = VisionConfig {
            height: 4,
            ..VisionConfig::default()
        };
        assert!(VisionNet::<f64>::zeros(bad).is_err());
    }
}
