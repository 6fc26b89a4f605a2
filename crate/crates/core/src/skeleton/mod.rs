//! Skeleton pipeline: joint features, windowing and the two-level LSTM.

mod features;
mod io;
mod net;

pub use features::{
    preprocess_skeleton, preprocess_skeleton_with, window_at, window_sequence, FeatureSet, SkeletonFeatures, SkeletonSequence,
    WindowingConfig, DEFAULT_HEAD_INDEX, DEFAULT_JOINTS, DEFAULT_SPINE_INDEX,
};
pub use io::SkeletonHeader;
pub use net::{skeleton_classify, SkeletonConfig, SkeletonGrads, SkeletonNet, SkeletonOutput};
