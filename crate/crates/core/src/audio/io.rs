//! Audio file formats.
//!
//! - WAV: mono 16-bit PCM with the canonical 44-byte header. Samples map to
//!   `i / 32768` on read and `round(x * 32767)` on write.
//! - JSON: `{"sample_rate": 16000, "samples": [...]}`; `sample_rate` is optional.
//! - Features CSV: a `mel_0,...` header row, then one row per frame.

use std::path::Path;

use super::filterbank::MelFeatures;
use super::frames::AudioSignal;
use crate::csvio::{read_rows, write_rows};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

const WAV_HEADER_LEN: usize = 44;

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

impl<T: Scalar> AudioSignal<T> {
    pub fn to_wav_bytes(&self) -> Vec<u8> {
        let data_len = (self.len() * 2) as u32;
        let rate = self.sample_rate();
        let mut out = Vec::with_capacity(WAV_HEADER_LEN + self.len() * 2);
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_len).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes()); // PCM
        out.extend_from_slice(&1u16.to_le_bytes()); // mono
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * 2).to_le_bytes());
        out.extend_from_slice(&2u16.to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&data_len.to_le_bytes());
        for &s in self.samples() {
            let q = (s.as_f64() * 32767.0).round().clamp(-32768.0, 32767.0) as i16;
            out.extend_from_slice(&q.to_le_bytes());
        }
        out
    }

    pub fn from_wav_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |d: &str| Error::format("wav", d.to_string());
        if bytes.len() < WAV_HEADER_LEN || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
            return Err(bad("missing RIFF/WAVE header"));
        }
        if &bytes[12..16] != b"fmt " || u32_at(bytes, 16) != 16 {
            return Err(bad("expected a 16-byte fmt chunk at offset 12"));
        }
        let (format, channels, rate, bits) = (u16_at(bytes, 20), u16_at(bytes, 22), u32_at(bytes, 24), u16_at(bytes, 34));
        if format != 1 || channels != 1 || bits != 16 {
            return Err(bad(&format!(
                "only mono 16-bit PCM is supported (format {format}, channels {channels}, bits {bits})"
            )));
        }
        if &bytes[36..40] != b"data" {
            return Err(bad("expected the data chunk at offset 36"));
        }
        let len = u32_at(bytes, 40) as usize;
        let body = bytes
            .get(WAV_HEADER_LEN..WAV_HEADER_LEN + len)
            .ok_or_else(|| bad("data chunk is truncated"))?;
        if !len.is_multiple_of(2) {
            return Err(bad("odd data length for 16-bit samples"));
        }
        let samples = body
            .chunks_exact(2)
            .map(|c| T::of(i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0))
            .collect();
        AudioSignal::new(samples, rate)
    }

    pub fn write_wav(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_wav_bytes())?)
    }

    pub fn read_wav(path: &Path) -> Result<Self> {
        Self::from_wav_bytes(&std::fs::read(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl<T: Scalar> MelFeatures<T> {
    pub fn to_csv(&self) -> Result<String> {
        let header: Vec<String> = (0..self.n_filters()).map(|m| format!("mel_{m}")).collect();
        write_rows::<T>(Some(&header), self.values.data().chunks_exact(self.n_filters()))
    }

    pub fn from_csv(body: &str, n_filters: usize) -> Result<Self> {
        let (rows, data) = read_rows("mel features csv", body, n_filters, true)?;
        Ok(MelFeatures {
            values: Tensor::from_vec(vec![rows, n_filters], data.into_iter().map(T::of).collect())?,
        })
    }
}
