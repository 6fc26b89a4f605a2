//! Synthetic multimodal action dataset.
//!
//! Every video carries an RGB clip stack, a skeleton sequence and,
//! optionally, a short audio track. Class evidence is split across
//! modalities by an [`InformativenessMap`]: each modality renders a
//! *pattern* chosen by class, and classes sharing a pattern are
//! indistinguishable in that modality. With the default map the skeleton
//! separates classes 1-4 and lumps 5-7 together, while RGB separates 5-7
//! and lumps 1-4, so only the combination identifies every class.
//!
//! On-disk layout under the output directory:
//!
//! - `manifest.json`
//! - `rgb/<id>.rgb`: 8-byte magic `MMRGB001`, then `T, C, H, W` as
//!   little-endian u32, then `T*C*H*W` bytes (pixel value * 255).
//! - `skeleton/<id>.csv` + `skeleton/<id>.json` (sidecar header).
//! - `audio/<id>.wav` when audio is enabled.

use std::path::Path;

use mmrec_core::audio::AudioSignal;
use mmrec_core::skeleton::{SkeletonSequence, DEFAULT_HEAD_INDEX, DEFAULT_JOINTS, DEFAULT_SPINE_INDEX};
use mmrec_core::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, read_json, write_json, HarnessError, Result};

pub const CLASSES: usize = 7;
pub const SPLITS: usize = 4;
pub const RGB_MAGIC: &[u8; 8] = b"MMRGB001";
const AUDIO_SECS: f64 = 0.25;
const AUDIO_RATE: u32 = 16_000;
const SPECIAL_TONE_HZ: f64 = 440.0;
const OTHER_TONES_HZ: [f64; 3] = [150.0, 2500.0, 5000.0];

/// Pattern index per class for each modality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformativenessMap {
    pub rgb: Vec<usize>,
    pub skeleton: Vec<usize>,
}

impl Default for InformativenessMap {
    fn default() -> Self {
        InformativenessMap {
            rgb: vec![0, 0, 0, 0, 1, 2, 3],
            skeleton: vec![0, 1, 2, 3, 4, 4, 4],
        }
    }
}

/// Bayes-optimal accuracy of a classifier that only sees the pattern,
/// under a uniform class prior: the number of distinct patterns over the
/// number of classes (one correct class per pattern).
pub fn pattern_accuracy_bound(patterns: &[usize]) -> f64 {
    let mut distinct = patterns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct.len() as f64 / patterns.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDatasetSpec {
    pub n_classes: usize,
    pub n_videos: usize,
    pub frames_mean: f64,
    pub frames_sd: f64,
    pub frames_min: usize,
    pub frames_max: usize,
    pub height: usize,
    pub width: usize,
    pub joints: usize,
    pub seed: u64,
    pub audio: bool,
    /// Class whose audio track carries the special tone.
    pub special_class: usize,
    pub map: InformativenessMap,
}

impl Default for SyntheticDatasetSpec {
    fn default() -> Self {
        SyntheticDatasetSpec {
            n_classes: CLASSES,
            n_videos: 386,
            frames_mean: 300.0,
            frames_sd: 30.0,
            frames_min: 64,
            frames_max: 400,
            height: 8,
            width: 8,
            joints: DEFAULT_JOINTS,
            seed: 42,
            audio: false,
            special_class: CLASSES - 1,
            map: InformativenessMap::default(),
        }
    }
}

impl SyntheticDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n_classes != CLASSES || self.map.rgb.len() != CLASSES || self.map.skeleton.len() != CLASSES {
            return bad(format!("the generator renders exactly {CLASSES} classes"));
        }
        if self.map.rgb.iter().any(|&p| p > 3) || self.map.skeleton.iter().any(|&p| p > 4) {
            return bad("rgb patterns must be in 0..=3 and skeleton patterns in 0..=4".into());
        }
        if self.n_videos < self.n_classes * SPLITS * 2 {
            return bad(format!(
                "need at least {} videos so every split holds two per class",
                self.n_classes * SPLITS * 2
            ));
        }
        if self.frames_min < 16 || self.frames_min > self.frames_max || self.frames_sd.is_nan() || self.frames_sd < 0.0 {
            return bad("frame range must satisfy 16 <= frames_min <= frames_max and sd >= 0".into());
        }
        if self.height < 5 || self.width < 5 {
            return bad("frames must be at least 5x5".into());
        }
        if self.joints != DEFAULT_JOINTS {
            return bad(format!("the skeleton renderer draws {DEFAULT_JOINTS} joints"));
        }
        if self.special_class >= self.n_classes {
            return bad("special_class out of range".into());
        }
        Ok(())
    }

    /// Class of video `v`: round robin, so every class count differs by at most one.
    pub fn label(&self, v: usize) -> usize {
        v % self.n_classes
    }

    /// Split (1-based) of video `v`: consecutive class rounds rotate over the splits.
    pub fn split(&self, v: usize) -> usize {
        (v / self.n_classes) % SPLITS + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub id: String,
    pub label: usize,
    pub split: usize,
    pub frames: usize,
    pub rgb: String,
    pub skeleton: String,
    pub skeleton_header: String,
    pub audio: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub spec: SyntheticDatasetSpec,
    pub videos: Vec<VideoEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let m: Manifest = read_json(&dir.join("manifest.json"))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let mut seen = std::collections::HashSet::new();
        for v in &self.videos {
            if !seen.insert(v.id.as_str()) {
                return Err(HarnessError::Dataset(format!("video {} listed twice", v.id)));
            }
            if v.label >= self.spec.n_classes || !(1..=SPLITS).contains(&v.split) {
                return Err(HarnessError::Dataset(format!("video {} has label {} split {}", v.id, v.label, v.split)));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer; decorrelates per-video seeds.
pub fn stream_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One rendered video before it is written.
pub struct SyntheticVideo {
    pub label: usize,
    pub rgb: Vec<u8>,
    pub rgb_shape: [usize; 4],
    pub skeleton: SkeletonSequence<f64>,
    pub audio: Option<AudioSignal<f64>>,
}

pub fn render_video(spec: &SyntheticDatasetSpec, v: usize) -> Result<SyntheticVideo> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(spec.seed, v as u64));
    let label = spec.label(v);
    let normal = Normal::new(spec.frames_mean, spec.frames_sd).map_err(|e| HarnessError::Config(e.to_string()))?;
    let frames = (normal.sample(&mut rng).round().max(0.0) as usize).clamp(spec.frames_min, spec.frames_max);
    let rgb = render_rgb(spec.map.rgb[label], frames, spec.height, spec.width, &mut rng);
    let skeleton = render_skeleton(spec.map.skeleton[label], frames, &mut rng)?;
    let audio = if spec.audio {
        Some(render_audio(label == spec.special_class, &mut rng)?)
    } else {
        None
    };
    Ok(SyntheticVideo {
        label,
        rgb,
        rgb_shape: [frames, 3, spec.height, spec.width],
        skeleton,
        audio,
    })
}

/// A colored Gaussian blob moving along a pattern-specific path over a noisy
/// background.
fn render_rgb(pattern: usize, frames: usize, h: usize, w: usize, rng: &mut impl Rng) -> Vec<u8> {
    const COLORS: [[f64; 3]; 4] = [[1.0, 0.25, 0.2], [0.2, 1.0, 0.3], [0.25, 0.3, 1.0], [1.0, 0.9, 0.2]];
    let color = COLORS[pattern];
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let speed = rng.random_range(0.08..0.14);
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let (ry, rx) = (cy * 0.7, cx * 0.7);
    let mut out = Vec::with_capacity(frames * 3 * h * w);
    for t in 0..frames {
        let s = phase + speed * t as f64;
        let (by, bx) = match pattern {
            0 => (cy, cx + rx * s.sin()),
            1 => (cy + ry * s.sin(), cx),
            2 => (cy + ry * s.sin(), cx + rx * s.sin()),
            _ => (cy + ry * s.sin(), cx + rx * s.cos()),
        };
        let mut frame = vec![0.0; 3 * h * w];
        for y in 0..h {
            for x in 0..w {
                let d2 = (y as f64 - by).powi(2) + (x as f64 - bx).powi(2);
                let blob = 0.8 * (-d2 / (2.0 * 1.2 * 1.2)).exp();
                for c in 0..3 {
                    frame[(c * h + y) * w + x] = blob * color[c] + rng.random_range(0.0..0.15);
                }
            }
        }
        out.extend(frame.into_iter().map(|v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    }
    out
}

/// Standing pose in meters, Kinect joint order, y up.
const REST_POSE: [[f64; 3]; 20] = [
    [0.0, 0.90, 0.0],   // hip center
    [0.0, 1.10, 0.0],   // spine
    [0.0, 1.40, 0.0],   // shoulder center
    [0.0, 1.60, 0.0],   // head
    [-0.20, 1.40, 0.0], // left shoulder
    [-0.22, 1.12, 0.0], // left elbow
    [-0.23, 0.87, 0.0], // left wrist
    [-0.23, 0.79, 0.0], // left hand
    [0.20, 1.40, 0.0],  // right shoulder
    [0.22, 1.12, 0.0],  // right elbow
    [0.23, 0.87, 0.0],  // right wrist
    [0.23, 0.79, 0.0],  // right hand
    [-0.10, 0.85, 0.0], // left hip
    [-0.10, 0.50, 0.0], // left knee
    [-0.10, 0.10, 0.0], // left ankle
    [-0.10, 0.05, 0.1], // left foot
    [0.10, 0.85, 0.0],  // right hip
    [0.10, 0.50, 0.0],  // right knee
    [0.10, 0.10, 0.0],  // right ankle
    [0.10, 0.05, 0.1],  // right foot
];

const ARM_SEGMENTS: [f64; 3] = [0.28, 0.25, 0.08];

/// Arm angles per pattern: `(left base, left amplitude, right base, right amplitude, frequency Hz, forward)`.
/// Angles are measured from hanging straight down; `forward` swings the
/// arms toward the camera instead of sideways.
const ARM_MOTION: [(f64, f64, f64, f64, f64, bool); 5] = [
    (2.4, 0.5, 0.1, 0.05, 1.0, false),
    (0.1, 0.05, 2.4, 0.5, 1.3, false),
    (1.5, 0.2, 1.5, 0.2, 0.6, false),
    (1.2, 0.6, 1.2, 0.6, 1.6, true),
    (0.15, 0.05, 0.15, 0.05, 0.4, false),
];

/// Sinusoidal arm movements on a randomly placed, scaled and turned body.
fn render_skeleton(pattern: usize, frames: usize, rng: &mut impl Rng) -> Result<SkeletonSequence<f64>> {
    let (lb, la, rb, ra, freq, forward) = ARM_MOTION[pattern];
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let freq = freq * rng.random_range(0.85..1.15);
    let scale = rng.random_range(0.85..1.15);
    let yaw: f64 = rng.random_range(-0.26..0.26);
    let offset = [rng.random_range(-1.0..1.0), rng.random_range(-0.05..0.05), rng.random_range(1.5..3.5)];
    let jitter = Normal::new(0.0, 0.005).expect("valid sd");
    let (cy, sy) = (yaw.cos(), yaw.sin());
    let mut data = Vec::with_capacity(frames * 60);
    for t in 0..frames {
        let time = t as f64 / 30.0;
        let wave = (std::f64::consts::TAU * freq * time + phase).sin();
        let mut pose = REST_POSE;
        for (shoulder, sign, angle) in [(4usize, -1.0, lb + la * wave), (8, 1.0, rb + ra * wave)] {
            let (s, c) = angle.sin_cos();
            let dir = if forward { [0.0, -c, s] } else { [sign * s, -c, 0.0] };
            let mut p = pose[shoulder];
            for (k, len) in ARM_SEGMENTS.iter().enumerate() {
                p = [p[0] + dir[0] * len, p[1] + dir[1] * len, p[2] + dir[2] * len];
                pose[shoulder + 1 + k] = p;
            }
        }
        for j in pose {
            let (x, y, z) = (j[0] * scale, j[1] * scale, j[2] * scale);
            let rotated = [cy * x + sy * z, y, -sy * x + cy * z];
            for a in 0..3 {
                let v = rotated[a] + offset[a] + jitter.sample(rng);
                data.push((v * 1e4).round() / 1e4);
            }
        }
    }
    Ok(SkeletonSequence::new(
        Tensor::from_vec(vec![frames, DEFAULT_JOINTS, 3], data)?,
        DEFAULT_SPINE_INDEX,
        DEFAULT_HEAD_INDEX,
    )?)
}

/// A 440 Hz tone for the special class, another tone otherwise, with noise.
fn render_audio(special: bool, rng: &mut impl Rng) -> Result<AudioSignal<f64>> {
    let freq = if special {
        SPECIAL_TONE_HZ
    } else {
        OTHER_TONES_HZ[rng.random_range(0..OTHER_TONES_HZ.len())]
    };
    let amp = rng.random_range(0.2..0.6);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let n = (AUDIO_SECS * AUDIO_RATE as f64) as usize;
    let samples = (0..n)
        .map(|i| {
            let s = amp * (std::f64::consts::TAU * freq * i as f64 / AUDIO_RATE as f64 + phase).sin();
            (s + rng.random_range(-0.01..0.01)).clamp(-1.0, 1.0)
        })
        .collect();
    Ok(AudioSignal::new(samples, AUDIO_RATE)?)
}

fn rgb_bytes(video: &SyntheticVideo) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + video.rgb.len());
    out.extend_from_slice(RGB_MAGIC);
    for d in video.rgb_shape {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&video.rgb);
    out
}

/// Reads an `.rgb` file into a `[T, C, H, W]` tensor with values in `[0, 1]`.
pub fn read_rgb(path: &Path) -> Result<Tensor<f64>> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    let bad = |m: &str| HarnessError::Dataset(format!("{}: {m}", path.display()));
    if bytes.len() < 24 || &bytes[..8] != RGB_MAGIC {
        return Err(bad("missing MMRGB001 header"));
    }
    let dims: Vec<usize> = (0..4)
        .map(|k| u32::from_le_bytes(bytes[8 + 4 * k..12 + 4 * k].try_into().expect("4 bytes")) as usize)
        .collect();
    let n: usize = dims.iter().product();
    if bytes.len() != 24 + n {
        return Err(bad(&format!("expected {n} pixel bytes, found {}", bytes.len() - 24)));
    }
    Ok(Tensor::from_vec(dims, bytes[24..].iter().map(|&b| b as f64 / 255.0).collect())?)
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(io_err(path))
}

/// Renders every video and writes the dataset under `out`.
pub fn generate_dataset(spec: &SyntheticDatasetSpec, out: &Path) -> Result<Manifest> {
    spec.validate()?;
    for sub in ["rgb", "skeleton", "audio"] {
        if sub != "audio" || spec.audio {
            create_dir(&out.join(sub))?;
        }
    }
    let mut videos = Vec::with_capacity(spec.n_videos);
    for v in 0..spec.n_videos {
        let video = render_video(spec, v)?;
        let id = format!("v{v:04}");
        let rgb = format!("rgb/{id}.rgb");
        let path = out.join(&rgb);
        std::fs::write(&path, rgb_bytes(&video)).map_err(io_err(&path))?;
        let skel_dir = out.join("skeleton");
        video.skeleton.write_csv_pair(&skel_dir, &id).map_err(|e| match e {
            mmrec_core::Error::Io(source) => HarnessError::Io {
                path: skel_dir.display().to_string(),
                source,
            },
            other => other.into(),
        })?;
        let audio = match &video.audio {
            Some(signal) => {
                let rel = format!("audio/{id}.wav");
                let path = out.join(&rel);
                std::fs::write(&path, signal.to_wav_bytes()).map_err(io_err(&path))?;
                Some(rel)
            }
            None => None,
        };
        videos.push(VideoEntry {
            id: id.clone(),
            label: video.label,
            split: spec.split(v),
            frames: video.rgb_shape[0],
            rgb,
            skeleton: format!("skeleton/{id}.csv"),
            skeleton_header: format!("skeleton/{id}.json"),
            audio,
        });
    }
    let manifest = Manifest {
        version: 1,
        spec: spec.clone(),
        videos,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
