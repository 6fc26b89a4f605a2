//! Multimodal action recognition toolkit.
//!
//! Three modality pipelines and the fusion layer that combines them:
//!
//! - [`kernels`]: tensors, N-d convolution, LSTM cell, dense layers,
//!   softmax / argmax decision, L2 penalty, SGD and finite-difference
//!   gradient checking.
//! - [`vision`]: factorized Inception-style convolution blocks and a small
//!   3D ConvNet over 16-frame RGB clips.
//! - [`skeleton`]: spine-relative joint features, overlapped windowing and
//!   a two-level LSTM classifier.
//! - [`audio`]: DFT energy spectrum, mel filterbank energies and a binary
//!   voice detector.
//! - [`fusion`]: feature concatenation + softmax, alpha-weighted probability
//!   fusion, one-vs-one SVM re-fusion and the image/voice verification table.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below pin the
//! common instantiations.

pub mod audio;
mod csvio;
pub mod error;
pub mod fusion;
pub mod kernels;
pub mod scalar;
pub mod skeleton;
pub mod tensor;
pub mod vision;

pub use error::{Error, Result};
pub use kernels::ProbVector;
pub use scalar::Scalar;
pub use tensor::Tensor;

pub type Tensor64 = Tensor<f64>;
pub type Tensor32 = Tensor<f32>;
pub type ProbVector64 = ProbVector<f64>;
pub type ProbVector32 = ProbVector<f32>;
