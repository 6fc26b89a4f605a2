//! RGB pipeline: factorized convolution blocks and the clip-level 3-D ConvNet.

mod clips;
mod factorized;
mod net;

pub use clips::{clip_at, clip_starts, video_to_clips, RgbClip, CLIP_LEN};
pub use factorized::{factorized_forward, multiply_count, FactorizationMode, FactorizedBlock};
pub use net::{
    rgb_clip_features, AuxClassifierOutput, ClipFeatures, VideoFeatures, VisionConfig, VisionGrads, VisionNet,
};
