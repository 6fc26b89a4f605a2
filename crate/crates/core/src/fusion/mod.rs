//! Late fusion: feature concatenation with a softmax decision,
//! alpha-weighted probability fusion, one-vs-one SVM re-fusion and the
//! image/voice verification table.

pub mod alpha;
pub mod decision;
pub mod export;
pub mod features;
pub mod svm;

pub use alpha::{alpha_fuse, FusionConfig};
pub use decision::{decision_fusion, detected, FusionDecision, FusionOutcome};
pub use export::{fusion_records_from_csv, fusion_records_to_csv, FusionRecord};
pub use features::{concat_features, softmax_classify, FeatureSource, FeatureVector};
pub use svm::{
    couple_pairwise, pair_count, svm_fuse_predict, svm_fuse_train, LinearSvm, PairClassifier, PlattScaling, SvmConfig,
    SvmFusionModel,
};
