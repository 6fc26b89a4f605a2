//! Dense kernels and training math shared by the modality networks.

pub mod activation;
pub mod conv;
pub mod dense;
pub mod gradcheck;
pub mod linalg;
pub mod lstm;
pub mod optim;
pub mod params;
pub mod prob;

pub use activation::{sigmoid, ActivationKind};
pub use conv::{conv_backward, conv_forward, ConvGrads, ConvSpec, Padding};
pub use dense::{dense_forward, Dense, DenseGrads};
pub use gradcheck::{grad_check, GRAD_CHECK_FLOOR};
pub use lstm::{lstm_step, LstmCache, LstmCell, LstmGrads, LstmParams};
pub use optim::{l2_penalty, sgd_step, sgd_update, SgdConfig};
pub use params::{apply_sgd, clip_grad_norm, Parameterized};
pub use prob::{argmax, argmax_decision, cross_entropy_with_grad, softmax, softmax_slice, ProbVector};
