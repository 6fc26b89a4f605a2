//! Audio signals and framing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

/// Mono signal with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "RawSignal<T>")]
pub struct AudioSignal<T = f64> {
    samples: Vec<T>,
    sample_rate: u32,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawSignal<T> {
    samples: Vec<T>,
    #[serde(default = "default_rate")]
    sample_rate: u32,
}

fn default_rate() -> u32 {
    DEFAULT_SAMPLE_RATE
}

impl<T: Scalar> TryFrom<RawSignal<T>> for AudioSignal<T> {
    type Error = Error;

    fn try_from(raw: RawSignal<T>) -> Result<Self> {
        AudioSignal::new(raw.samples, raw.sample_rate)
    }
}

impl<T: Scalar> AudioSignal<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("audio samples"));
        }
        if let Some(v) = samples.iter().find(|v| v.abs() > T::one()) {
            return Err(Error::InvalidConfig(format!("audio sample {} outside [-1, 1]", v.as_f64())));
        }
        Ok(AudioSignal { samples, sample_rate })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    None,
    #[default]
    Hann,
}

impl WindowKind {
    /// Window coefficients of length `n` (symmetric Hann).
    pub fn coefficients<T: Scalar>(self, n: usize) -> Vec<T> {
        match self {
            WindowKind::None => vec![T::one(); n],
            WindowKind::Hann if n == 1 => vec![T::one()],
            WindowKind::Hann => (0..n)
                .map(|i| {
                    let phase = 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64;
                    T::of(0.5 - 0.5 * phase.cos())
                })
                .collect(),
        }
    }
}

/// Framing parameters, in samples. Defaults are 25 ms / 10 ms at 16 kHz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub frame_len: usize,
    pub hop: usize,
    pub window: WindowKind,
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec {
            frame_len: 400,
            hop: 160,
            window: WindowKind::Hann,
        }
    }
}

impl FrameSpec {
    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::InvalidConfig(format!(
                "frame spec needs 0 < hop <= frame_len, got hop {} frame_len {}",
                self.hop, self.frame_len
            )));
        }
        Ok(())
    }

    /// Number of whole frames in `len` samples; trailing samples are dropped.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            1 + (len - self.frame_len) / self.hop
        }
    }

    /// Windowed frames of `signal`.
    pub fn frames<T: Scalar>(&self, signal: &AudioSignal<T>) -> Result<Vec<Vec<T>>> {
        self.validate()?;
        let count = self.frame_count(signal.len());
        if count == 0 {
            return Err(Error::TooShort {
                context: "audio framing",
                needed: self.frame_len,
                got: signal.len(),
            });
        }
        let w: Vec<T> = self.window.coefficients(self.frame_len);
        Ok((0..count)
            .map(|f| {
                let start = f * self.hop;
                signal.samples()[start..start + self.frame_len]
                    .iter()
                    .zip(&w)
                    .map(|(&x, &c)| x * c)
                    .collect()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_counts() {
        let spec = FrameSpec::default();
        assert_eq!(spec.frame_count(399), 0);
        assert_eq!(spec.frame_count(400), 1);
        assert_eq!(spec.frame_count(559), 1);
        assert_eq!(spec.frame_count(560), 2);
        assert_eq!(spec.frame_count(16_000), 98);
    }

    #[test]
    fn hann_endpoints_and_peak() {
        let w: Vec<f64> = WindowKind::Hann.coefficients(5);
        assert_eq!(w[0], 0.0);
        assert!((w[2] - 1.0).abs() < 1e-15);
        assert!((w[4]).abs() < 1e-15);
    }

    #[test]
    fn signal_validation() {
        assert!(AudioSignal::new(vec![0.5_f64, 1.5], 16_000).is_err());
        assert!(AudioSignal::new(vec![0.5_f64], 0).is_err());
        assert!(AudioSignal::new(vec![f64::NAN], 8_000).is_err());
        let bad = FrameSpec {
            hop: 500,
            ..FrameSpec::default()
        };
        assert!(bad.validate().is_err());
    }
}
