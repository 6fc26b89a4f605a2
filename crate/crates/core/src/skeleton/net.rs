//! Two stacked LSTMs followed by a small fully-connected stack.
//!
//! Each window runs through LSTM-1 and LSTM-2; the final hidden state of
//! LSTM-2 feeds `fc_low` (relu) and then the class layer. The `fc_low`
//! activation is the bone-point representation handed to fusion.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    cross_entropy_with_grad, softmax_slice, ActivationKind, Dense, DenseGrads, LstmCache, LstmCell, LstmGrads,
    LstmParams, Parameterized, ProbVector,
};
use crate::scalar::{from_usize, Scalar};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonConfig {
    pub input_size: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub fc_low: usize,
    pub classes: usize,
    /// Backpropagate through at most this many trailing steps of a window;
    /// 0 means the whole window.
    pub bptt_limit: usize,
}

impl SkeletonConfig {
    pub fn new(input_size: usize) -> Self {
        SkeletonConfig {
            input_size,
            hidden1: 32,
            hidden2: 32,
            fc_low: 32,
            classes: 7,
            bptt_limit: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.input_size, self.hidden1, self.hidden2, self.fc_low].contains(&0) || self.classes < 2 {
            return Err(Error::InvalidConfig("skeleton layer sizes must be positive and classes >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SkeletonNet<T = f64> {
    pub config: SkeletonConfig,
    pub lstm1: LstmParams<T>,
    pub lstm2: LstmParams<T>,
    pub fc_low: Dense<T>,
    pub fc_out: Dense<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonGrads<T = f64> {
    pub lstm1: LstmGrads<T>,
    pub lstm2: LstmGrads<T>,
    pub fc_low: DenseGrads<T>,
    pub fc_out: DenseGrads<T>,
}

/// Per-sequence output of [`skeleton_classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonOutput<T = f64> {
    /// Mean of the per-window class probabilities.
    pub probs: ProbVector<T>,
    /// Mean of the per-window `fc_low` activations.
    pub lowest_fc: Tensor<T>,
}

struct WindowTrace<T> {
    caches1: Vec<LstmCache<T>>,
    caches2: Vec<LstmCache<T>>,
    last_h: Vec<T>,
    low: Vec<T>,
    logits: Vec<T>,
}

impl<T: Scalar> SkeletonNet<T> {
    pub fn zeros(config: SkeletonConfig) -> Result<Self> {
        config.validate()?;
        let c = &config;
        Ok(SkeletonNet {
            lstm1: LstmParams::zeros(c.input_size, c.hidden1),
            lstm2: LstmParams::zeros(c.hidden1, c.hidden2),
            fc_low: Dense::zeros(c.hidden2, c.fc_low, ActivationKind::Relu),
            fc_out: Dense::zeros(c.fc_low, c.classes, ActivationKind::Identity),
            config,
        })
    }

    pub fn init(config: SkeletonConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &config;
        Ok(SkeletonNet {
            lstm1: LstmParams::init(c.input_size, c.hidden1, &mut rng),
            lstm2: LstmParams::init(c.hidden1, c.hidden2, &mut rng),
            fc_low: Dense::init(c.hidden2, c.fc_low, ActivationKind::Relu, &mut rng),
            fc_out: Dense::init(c.fc_low, c.classes, ActivationKind::Identity, &mut rng),
            config,
        })
    }

    fn check_window(&self, window: &Tensor<T>) -> Result<()> {
        if window.rank() != 2 || window.shape()[1] != self.config.input_size {
            return Err(Error::shape(
                "skeleton net",
                format!(
                    "window shape {:?}, model expects feature width {}",
                    window.shape(),
                    self.config.input_size
                ),
            ));
        }
        Ok(())
    }

    fn trace(&self, window: &Tensor<T>) -> Result<WindowTrace<T>> {
        self.check_window(window)?;
        let c = &self.config;
        let steps = window.shape()[0];
        let (mut h1, mut c1) = (vec![T::zero(); c.hidden1], vec![T::zero(); c.hidden1]);
        let (mut h2, mut c2) = (vec![T::zero(); c.hidden2], vec![T::zero(); c.hidden2]);
        let mut caches1 = Vec::with_capacity(steps);
        let mut caches2 = Vec::with_capacity(steps);
        for x in window.data().chunks_exact(c.input_size) {
            let a = self.lstm1.forward_cached(x, &h1, &c1)?;
            let b = self.lstm2.forward_cached(&a.h, &h2, &c2)?;
            h1.clone_from(&a.h);
            c1.clone_from(&a.c);
            h2.clone_from(&b.h);
            c2.clone_from(&b.c);
            caches1.push(a);
            caches2.push(b);
        }
        let low = self.fc_low.forward(&h2)?;
        let logits = self.fc_out.forward(&low)?;
        Ok(WindowTrace {
            caches1,
            caches2,
            last_h: h2,
            low,
            logits,
        })
    }

    /// Class probabilities and `fc_low` activation for one window.
    pub fn forward_window(&self, window: &Tensor<T>) -> Result<(ProbVector<T>, Vec<T>)> {
        let t = self.trace(window)?;
        Ok((softmax_slice(&t.logits)?, t.low))
    }

    /// Cross-entropy for one window and its gradients (backpropagation
    /// through time, optionally truncated by `bptt_limit`).
    pub fn loss_and_grads(&self, window: &Tensor<T>, label: usize) -> Result<(T, SkeletonGrads<T>)> {
        if label >= self.config.classes {
            return Err(Error::InvalidConfig(format!("label {label} out of range")));
        }
        let t = self.trace(window)?;
        let mut g = SkeletonGrads::zeros_like(self);
        let (loss, dlogits) = cross_entropy_with_grad(&softmax_slice(&t.logits)?, label);
        let dlow = self.fc_out.backward(&t.low, &t.logits, &dlogits, &mut g.fc_out);
        let mut dh2 = self.fc_low.backward(&t.last_h, &t.low, &dlow, &mut g.fc_low);

        let steps = t.caches1.len();
        let first = match self.config.bptt_limit {
            0 => 0,
            k => steps.saturating_sub(k),
        };
        let mut dc2 = vec![T::zero(); self.config.hidden2];
        let mut dh1 = vec![T::zero(); self.config.hidden1];
        let mut dc1 = vec![T::zero(); self.config.hidden1];
        for s in (first..steps).rev() {
            let (dx2, dh2_prev, dc2_prev) = self.lstm2.backward(&t.caches2[s], &dh2, &dc2, &mut g.lstm2);
            for (a, b) in dh1.iter_mut().zip(&dx2) {
                *a += *b;
            }
            let (_, dh1_prev, dc1_prev) = self.lstm1.backward(&t.caches1[s], &dh1, &dc1, &mut g.lstm1);
            dh2 = dh2_prev;
            dc2 = dc2_prev;
            dh1 = dh1_prev;
            dc1 = dc1_prev;
        }
        Ok((loss, g))
    }
}

/// Runs every window through `model` and averages probabilities and
/// `fc_low` activations over windows.
pub fn skeleton_classify<T: Scalar>(windows: &[Tensor<T>], model: &SkeletonNet<T>) -> Result<SkeletonOutput<T>> {
    if windows.is_empty() {
        return Err(Error::Empty("skeleton windows"));
    }
    let mut probs = Vec::with_capacity(windows.len());
    let mut low = vec![T::zero(); model.config.fc_low];
    for w in windows {
        let (p, l) = model.forward_window(w)?;
        probs.push(p);
        for (acc, v) in low.iter_mut().zip(l) {
            *acc += v;
        }
    }
    let n = from_usize::<T>(windows.len());
    low.iter_mut().for_each(|v| *v /= n);
    Ok(SkeletonOutput {
        probs: ProbVector::mean(&probs)?,
        lowest_fc: Tensor::vector(low),
    })
}

impl<T: Scalar> SkeletonGrads<T> {
    pub fn zeros_like(net: &SkeletonNet<T>) -> Self {
        SkeletonGrads {
            lstm1: LstmGrads::zeros_like(&net.lstm1),
            lstm2: LstmGrads::zeros_like(&net.lstm2),
            fc_low: DenseGrads::zeros_like(&net.fc_low),
            fc_out: DenseGrads::zeros_like(&net.fc_out),
        }
    }
}

impl<T: Scalar> Parameterized<T> for SkeletonNet<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        let mut v = self.lstm1.param_slices();
        v.extend(self.lstm2.param_slices());
        v.extend(self.fc_low.param_slices());
        v.extend(self.fc_out.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = self.lstm1.param_slices_mut();
        v.extend(self.lstm2.param_slices_mut());
        v.extend(self.fc_low.param_slices_mut());
        v.extend(self.fc_out.param_slices_mut());
        v
    }
}

impl<T: Scalar> Parameterized<T> for SkeletonGrads<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        let mut v = self.lstm1.param_slices();
        v.extend(self.lstm2.param_slices());
        v.extend(self.fc_low.param_slices());
        v.extend(self.fc_out.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = self.lstm1.param_slices_mut();
        v.extend(self.lstm2.param_slices_mut());
        v.extend(self.fc_low.param_slices_mut());
        v.extend(self.fc_out.param_slices_mut());
        v
    }
}
