//! Training and evaluation of the four compared methods.
//!
//! RGB and skeleton networks train on every split except the held-out one.
//! Video-level features (mean fc7, mean lowest skeleton FC) of the training
//! videos then fit the one-vs-one SVM, and the training-split probabilities
//! pick the fusion weight alpha. The held-out split is scored as RGB only,
//! skeleton only, alpha-fused, and alpha-fused re-fused with the SVM output.
//!
//! Classifier heads start at zero, so an untrained network predicts the
//! uniform distribution.

use std::path::Path;

use mmrec_core::audio::{mel_features, AudioHead, AudioSignal, FrameSpec, MelFilterbank, SPECIAL};
use mmrec_core::fusion::{
    alpha_fuse, concat_features, svm_fuse_predict, svm_fuse_train, FeatureSource, FeatureVector, FusionConfig, SvmConfig,
    SvmFusionModel,
};
use mmrec_core::kernels::{apply_sgd, clip_grad_norm, ActivationKind, Dense, Parameterized, SgdConfig};
use mmrec_core::skeleton::{
    preprocess_skeleton, skeleton_classify, window_at, window_sequence, SkeletonConfig, SkeletonFeatures, SkeletonGrads,
    SkeletonNet, SkeletonSequence, WindowingConfig,
};
use mmrec_core::vision::{clip_at, VisionConfig, VisionGrads, VisionNet, CLIP_LEN};
use mmrec_core::{ProbVector, Tensor};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cache::ProbabilityCache;
use crate::config::HarnessConfig;
use crate::dataset::{read_rgb, stream_seed, Manifest};
use crate::error::{io_err, HarnessError, Result};
use crate::report::ExperimentResult;
use crate::sweep::{accuracy_percent, fused_accuracy, sweep_alpha};

/// RNG stream ids derived from the master seed.
const STREAM_VISION_INIT: u64 = 1 << 32;
const STREAM_VISION_ORDER: u64 = (1 << 32) + 1;
const STREAM_SKELETON_INIT: u64 = (1 << 32) + 2;
const STREAM_SKELETON_ORDER: u64 = (1 << 32) + 3;
const STREAM_SVM: u64 = (1 << 32) + 4;

const AUDIO_EPOCHS: usize = 200;
const AUDIO_LR: f64 = 0.1;

pub struct LoadedVideo {
    pub id: String,
    pub label: usize,
    pub split: usize,
    pub rgb: Tensor<f64>,
    pub skeleton: SkeletonFeatures<f64>,
    pub audio: Option<AudioSignal<f64>>,
}

pub fn load_videos(dir: &Path, manifest: &Manifest) -> Result<Vec<LoadedVideo>> {
    manifest
        .videos
        .iter()
        .map(|e| {
            let rgb = read_rgb(&dir.join(&e.rgb))?;
            if rgb.shape()[0] < CLIP_LEN {
                return Err(HarnessError::Dataset(format!("{} has fewer than {CLIP_LEN} frames", e.id)));
            }
            let skel_dir = dir.join(&e.skeleton).parent().map(Path::to_path_buf).unwrap_or_default();
            let stem = Path::new(&e.skeleton).file_stem().and_then(|s| s.to_str()).unwrap_or(&e.id);
            let seq = SkeletonSequence::read_csv_pair(&skel_dir, stem).map_err(|err| match err {
                mmrec_core::Error::Io(source) => HarnessError::Io {
                    path: dir.join(&e.skeleton).display().to_string(),
                    source,
                },
                other => other.into(),
            })?;
            let audio = match &e.audio {
                Some(rel) => {
                    let path = dir.join(rel);
                    let bytes = std::fs::read(&path).map_err(io_err(&path))?;
                    Some(AudioSignal::from_wav_bytes(&bytes)?)
                }
                None => None,
            };
            Ok(LoadedVideo {
                id: e.id.clone(),
                label: e.label,
                split: e.split,
                rgb,
                skeleton: preprocess_skeleton(&seq)?,
                audio,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModels {
    pub vision: VisionNet<f64>,
    pub skeleton: SkeletonNet<f64>,
    pub svm: SvmFusionModel<f64>,
    pub audio: Option<AudioHead<f64>>,
    pub alpha: f64,
    pub seed: u64,
    pub config_hash: String,
    pub special_class: usize,
}

fn windowing(cfg: &HarnessConfig) -> Result<WindowingConfig> {
    Ok(WindowingConfig::new(cfg.window_len, cfg.window_overlap)?)
}

fn sgd(cfg: &HarnessConfig, lr: f64) -> Result<SgdConfig> {
    Ok(SgdConfig::new(lr, cfg.l2, cfg.seed)?)
}

/// Mini-batch SGD over `samples` with gradient-norm clipping on the batch mean.
fn run_batches<M, G, S>(
    model: &mut M,
    samples: &[S],
    batch: usize,
    clip: f64,
    opt: &SgdConfig,
    mut grads_of: impl FnMut(&M, &S) -> Result<G>,
) -> Result<()>
where
    M: Parameterized<f64>,
    G: Parameterized<f64>,
{
    for chunk in samples.chunks(batch) {
        let mut total: Option<G> = None;
        for s in chunk {
            let g = grads_of(model, s)?;
            match total.as_mut() {
                Some(t) => t.add_scaled(&g, 1.0),
                None => total = Some(g),
            }
        }
        if let Some(mut g) = total {
            let n = chunk.len() as f64;
            clip_grad_norm(&mut g, clip * n);
            apply_sgd(model, &g, 1.0 / n, opt)?;
        }
    }
    Ok(())
}

pub fn train_vision(train: &[&LoadedVideo], cfg: &HarnessConfig) -> Result<VisionNet<f64>> {
    let shape = train.first().ok_or_else(|| HarnessError::Dataset("no training videos".into()))?.rgb.shape();
    let vcfg = VisionConfig {
        channels: shape[1],
        height: shape[2],
        width: shape[3],
        ..VisionConfig::default()
    };
    let mut net = VisionNet::init(vcfg, stream_seed(cfg.seed, STREAM_VISION_INIT))?;
    net.fc8 = Dense::zeros(net.fc8.inputs(), net.fc8.outputs(), ActivationKind::Identity);
    net.aux = Dense::zeros(net.aux.inputs(), net.aux.outputs(), ActivationKind::Identity);
    let opt = sgd(cfg, cfg.vision_lr)?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, STREAM_VISION_ORDER));
    for _ in 0..cfg.epochs {
        let mut samples = Vec::with_capacity(train.len() * cfg.clips_per_video);
        for (i, v) in train.iter().enumerate() {
            let last = v.rgb.shape()[0] - CLIP_LEN;
            for _ in 0..cfg.clips_per_video {
                samples.push((i, rng.random_range(0..=last)));
            }
        }
        samples.shuffle(&mut rng);
        run_batches(&mut net, &samples, cfg.batch, cfg.grad_clip, &opt, |net, &(i, start)| {
            let (_, g): (f64, VisionGrads<f64>) = net.loss_and_grads(&clip_at(&train[i].rgb, start)?, train[i].label)?;
            Ok(g)
        })?;
    }
    Ok(net)
}

pub fn train_skeleton(train: &[&LoadedVideo], cfg: &HarnessConfig) -> Result<SkeletonNet<f64>> {
    let width = train.first().ok_or_else(|| HarnessError::Dataset("no training videos".into()))?.skeleton.width();
    let scfg = SkeletonConfig {
        bptt_limit: cfg.bptt_limit,
        ..SkeletonConfig::new(width)
    };
    let mut net = SkeletonNet::init(scfg, stream_seed(cfg.seed, STREAM_SKELETON_INIT))?;
    net.fc_out = Dense::zeros(net.fc_out.inputs(), net.fc_out.outputs(), ActivationKind::Identity);
    let opt = sgd(cfg, cfg.skeleton_lr)?;
    let win = windowing(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, STREAM_SKELETON_ORDER));
    for _ in 0..cfg.epochs {
        let mut samples: Vec<(usize, usize)> = train
            .iter()
            .enumerate()
            .map(|(i, v)| (i, rng.random_range(0..win.window_count(v.skeleton.len()))))
            .collect();
        samples.shuffle(&mut rng);
        run_batches(&mut net, &samples, cfg.batch, cfg.grad_clip, &opt, |net, &(i, k)| {
            let w = window_at(&train[i].skeleton, &win, k)?;
            let (_, g): (f64, SkeletonGrads<f64>) = net.loss_and_grads(&w, train[i].label)?;
            Ok(g)
        })?;
    }
    Ok(net)
}

/// Video-level outputs of both networks.
pub struct VideoOutputs {
    pub rgb: ProbVector<f64>,
    pub skeleton: ProbVector<f64>,
    pub feature: FeatureVector<f64>,
}

pub fn video_outputs(
    vision: &VisionNet<f64>,
    skeleton: &SkeletonNet<f64>,
    video: &LoadedVideo,
    cfg: &HarnessConfig,
) -> Result<VideoOutputs> {
    let v = vision.video_features(&video.rgb, cfg.eval_clip_stride)?;
    let s = skeleton_classify(&window_sequence(&video.skeleton, &windowing(cfg)?)?, skeleton)?;
    let feature = concat_features(
        &FeatureVector::new(v.fc7, FeatureSource::Image)?,
        &FeatureVector::from_tensor(&s.lowest_fc, FeatureSource::Skeleton)?,
    );
    Ok(VideoOutputs {
        rgb: v.probs,
        skeleton: s.probs,
        feature,
    })
}

fn audio_features(signal: &AudioSignal<f64>) -> Result<Vec<f64>> {
    let spec = FrameSpec::default();
    let bank = MelFilterbank::standard(spec.frame_len, signal.sample_rate())?;
    Ok(mel_features(signal, &spec, &bank)?.mean())
}

/// Picks the grid alpha with the best training accuracy; ties go to the
/// alpha closest to 0.5, then to the smaller alpha.
pub fn select_alpha(cache: &ProbabilityCache, cfg: &HarnessConfig) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &a in cfg.alpha_grid.values() {
        let acc = fused_accuracy(cache, a)?;
        let better = match best {
            None => true,
            Some((ba, bacc)) => acc > bacc || (acc == bacc && (a - 0.5).abs() < (ba - 0.5).abs()),
        };
        if better {
            best = Some((a, acc));
        }
    }
    Ok(best.map_or(0.5, |(a, _)| a))
}

fn split_videos<'a>(videos: &'a [LoadedVideo], cfg: &HarnessConfig) -> Result<(Vec<&'a LoadedVideo>, Vec<&'a LoadedVideo>)> {
    let (test, train): (Vec<_>, Vec<_>) = videos.iter().partition(|v| v.split == cfg.holdout);
    if train.is_empty() || test.is_empty() {
        return Err(HarnessError::Dataset(format!(
            "holdout split S{} leaves {} training and {} test videos",
            cfg.holdout,
            train.len(),
            test.len()
        )));
    }
    Ok((train, test))
}

pub fn train_models(videos: &[LoadedVideo], manifest: &Manifest, cfg: &HarnessConfig) -> Result<TrainedModels> {
    cfg.validate()?;
    let (train, _) = split_videos(videos, cfg)?;
    let vision = train_vision(&train, cfg)?;
    let skeleton = train_skeleton(&train, cfg)?;

    let outputs = train
        .iter()
        .map(|v| video_outputs(&vision, &skeleton, v, cfg))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<usize> = train.iter().map(|v| v.label).collect();
    let features: Vec<FeatureVector<f64>> = outputs.iter().map(|o| o.feature.clone()).collect();
    let svm_cfg = SvmConfig {
        epochs: cfg.svm_epochs,
        learning_rate: cfg.svm_lr,
        lambda: cfg.svm_lambda,
        seed: stream_seed(cfg.seed, STREAM_SVM),
        ..SvmConfig::default()
    };
    let mut svm = svm_fuse_train(&features, &labels, manifest.spec.n_classes, &svm_cfg)?;
    svm.config_hash = Some(cfg.hash());

    let train_cache = ProbabilityCache {
        ids: train.iter().map(|v| v.id.clone()).collect(),
        labels,
        rgb: outputs.iter().map(|o| o.rgb.clone()).collect(),
        skeleton: outputs.iter().map(|o| o.skeleton.clone()).collect(),
        svm: Vec::new(),
        audio_special: None,
        alpha: 0.5,
        svm_weight: cfg.svm_weight,
        special_class: manifest.spec.special_class,
    };
    let alpha = select_alpha(&train_cache, cfg)?;

    let audio = if cfg.audio && train.iter().all(|v| v.audio.is_some()) {
        let feats = train
            .iter()
            .map(|v| audio_features(v.audio.as_ref().expect("checked")))
            .collect::<Result<Vec<_>>>()?;
        let special: Vec<bool> = train.iter().map(|v| v.label == manifest.spec.special_class).collect();
        let mut head = AudioHead::zeros(feats[0].len());
        head.fit(&feats, &special, AUDIO_EPOCHS, &SgdConfig::new(AUDIO_LR, cfg.l2, cfg.seed)?)?;
        Some(head)
    } else {
        None
    };

    Ok(TrainedModels {
        vision,
        skeleton,
        svm,
        audio,
        alpha,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        special_class: manifest.spec.special_class,
    })
}

/// Runs the trained models over the held-out split.
pub fn evaluate(models: &TrainedModels, videos: &[LoadedVideo], cfg: &HarnessConfig) -> Result<ProbabilityCache> {
    let (_, test) = split_videos(videos, cfg)?;
    let mut cache = ProbabilityCache {
        ids: Vec::new(),
        labels: Vec::new(),
        rgb: Vec::new(),
        skeleton: Vec::new(),
        svm: Vec::new(),
        audio_special: models.audio.as_ref().map(|_| Vec::new()),
        alpha: models.alpha,
        svm_weight: cfg.svm_weight,
        special_class: models.special_class,
    };
    for v in test {
        let o = video_outputs(&models.vision, &models.skeleton, v, cfg)?;
        cache.svm.push(svm_fuse_predict(&models.svm, &o.feature)?);
        cache.ids.push(v.id.clone());
        cache.labels.push(v.label);
        cache.rgb.push(o.rgb);
        cache.skeleton.push(o.skeleton);
        if let (Some(head), Some(out)) = (&models.audio, cache.audio_special.as_mut()) {
            let signal = v
                .audio
                .as_ref()
                .ok_or_else(|| HarnessError::Dataset(format!("{} has no audio track", v.id)))?;
            out.push(head.probs(&audio_features(signal)?)?.get(SPECIAL));
        }
    }
    Ok(cache)
}

/// Alpha-fused probabilities at the cache's chosen alpha.
pub fn fused_probs(cache: &ProbabilityCache) -> Result<Vec<ProbVector<f64>>> {
    let cfg = FusionConfig::new(cache.alpha)?;
    Ok(cache
        .rgb
        .iter()
        .zip(&cache.skeleton)
        .map(|(p, q)| alpha_fuse(p, q, cfg))
        .collect::<std::result::Result<_, _>>()?)
}

/// Final probabilities: the SVM output re-fused with the alpha-fused output.
pub fn refused_probs(cache: &ProbabilityCache) -> Result<Vec<ProbVector<f64>>> {
    let cfg = FusionConfig::new(cache.svm_weight)?;
    Ok(fused_probs(cache)?
        .iter()
        .zip(&cache.svm)
        .map(|(f, s)| alpha_fuse(s, f, cfg))
        .collect::<std::result::Result<_, _>>()?)
}

/// Accuracy table for the four methods (no alpha curve).
pub fn score(cache: &ProbabilityCache, seed: u64, config_hash: &str) -> Result<ExperimentResult> {
    let labels = &cache.labels;
    let rgb = accuracy_percent(cache.rgb.iter().map(|p| p.decision()), labels);
    let skel = accuracy_percent(cache.skeleton.iter().map(|p| p.decision()), labels);
    let fused = accuracy_percent(fused_probs(cache)?.iter().map(|p| p.decision()), labels);
    let refused = accuracy_percent(refused_probs(cache)?.iter().map(|p| p.decision()), labels);
    ExperimentResult::from_accuracies(seed, config_hash, [rgb, skel, fused, refused])
}

/// Trains, evaluates and sweeps alpha in one call.
pub fn run_experiment(dir: &Path, cfg: &HarnessConfig) -> Result<ExperimentResult> {
    let manifest = Manifest::load(dir)?;
    let videos = load_videos(dir, &manifest)?;
    let models = train_models(&videos, &manifest, cfg)?;
    let cache = evaluate(&models, &videos, cfg)?;
    let mut result = score(&cache, cfg.seed, &cfg.hash())?;
    result.curve = sweep_alpha(&cache, &cfg.alpha_grid)?;
    Ok(result)
}
