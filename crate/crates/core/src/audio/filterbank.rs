//! Triangular mel filterbank and log filterbank energies.

use serde::{Deserialize, Serialize};

use super::frames::{AudioSignal, FrameSpec};
use super::spectrum::{hz_to_mel, mel_to_hz, Dft};
use crate::error::{Error, Result};
use crate::kernels::linalg::dot;
use crate::scalar::{from_usize, Scalar};
use crate::tensor::Tensor;

/// Floor applied to filter energies before the log.
pub const ENERGY_FLOOR: f64 = 1e-10;

/// Filters are triangles in Hz with corners equally spaced in mel between
/// `f_min` and `f_max`. Weights cover all `n_bins` DFT bins; bins above
/// Nyquist carry zero weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MelFilterbank<T = f64> {
    pub sample_rate: u32,
    pub f_min: f64,
    pub f_max: f64,
    /// Center frequencies in Hz, strictly increasing.
    pub centers: Vec<f64>,
    /// `[n_filters, n_bins]`
    pub weights: Tensor<T>,
}

impl<T: Scalar> MelFilterbank<T> {
    pub fn new(n_filters: usize, n_bins: usize, sample_rate: u32, f_min: f64, f_max: f64) -> Result<Self> {
        let nyquist = sample_rate as f64 / 2.0;
        if n_filters == 0 || n_bins == 0 {
            return Err(Error::InvalidConfig("filterbank needs at least one filter and one bin".into()));
        }
        if !(f_min >= 0.0 && f_min < f_max && f_max <= nyquist) {
            return Err(Error::InvalidConfig(format!(
                "filterbank range must satisfy 0 <= f_min < f_max <= {nyquist}, got [{f_min}, {f_max}]"
            )));
        }
        let (m_lo, m_hi) = (hz_to_mel(f_min)?, hz_to_mel(f_max)?);
        let corners = (0..n_filters + 2)
            .map(|k| mel_to_hz(m_lo + (m_hi - m_lo) * k as f64 / (n_filters + 1) as f64))
            .collect::<Result<Vec<f64>>>()?;
        let bin_hz = sample_rate as f64 / n_bins as f64;
        let mut weights = vec![T::zero(); n_filters * n_bins];
        for m in 0..n_filters {
            let (lo, c, hi) = (corners[m], corners[m + 1], corners[m + 2]);
            let row = &mut weights[m * n_bins..(m + 1) * n_bins];
            for (r, w) in row.iter_mut().enumerate().take(n_bins / 2 + 1) {
                let f = r as f64 * bin_hz;
                let v = if f > lo && f <= c {
                    (f - lo) / (c - lo)
                } else if f > c && f < hi {
                    (hi - f) / (hi - c)
                } else {
                    0.0
                };
                *w = T::of(v);
            }
            if row.iter().all(|w| *w <= T::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "mel filter {m} ({lo:.1}-{hi:.1} Hz) covers no DFT bin; use fewer filters or longer frames"
                )));
            }
        }
        Ok(MelFilterbank {
            sample_rate,
            f_min,
            f_max,
            centers: corners[1..=n_filters].to_vec(),
            weights: Tensor::from_vec(vec![n_filters, n_bins], weights)?,
        })
    }

    /// 26 filters over 0..8 kHz for the default 16 kHz frame spec.
    pub fn standard(frame_len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(26, frame_len, sample_rate, 0.0, (sample_rate as f64 / 2.0).min(8000.0))
    }

    pub fn n_filters(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn n_bins(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn filter(&self, m: usize) -> &[T] {
        let n = self.n_bins();
        &self.weights.data()[m * n..(m + 1) * n]
    }
}

/// `log(max(sum_r w_m(r) E(r), floor))` for each filter `m`.
pub fn mel_energies<T: Scalar>(spectrum: &[T], bank: &MelFilterbank<T>) -> Result<Vec<T>> {
    if spectrum.len() != bank.n_bins() {
        return Err(Error::shape(
            "mel energies",
            format!("spectrum has {} bins, filterbank expects {}", spectrum.len(), bank.n_bins()),
        ));
    }
    let floor = T::of(ENERGY_FLOOR);
    Ok((0..bank.n_filters())
        .map(|m| dot(bank.filter(m), spectrum).max(floor).ln())
        .collect())
}

/// Per-frame log mel energies, `[frames, n_filters]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFeatures<T = f64> {
    pub values: Tensor<T>,
}

impl<T: Scalar> MelFeatures<T> {
    pub fn frames(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn n_filters(&self) -> usize {
        self.values.shape()[1]
    }

    pub fn row(&self, f: usize) -> &[T] {
        let n = self.n_filters();
        &self.values.data()[f * n..(f + 1) * n]
    }

    /// Column means over frames.
    pub fn mean(&self) -> Vec<T> {
        let n = self.n_filters();
        let mut out = vec![T::zero(); n];
        for row in self.values.data().chunks_exact(n) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        let count = from_usize::<T>(self.frames());
        out.iter_mut().for_each(|v| *v /= count);
        out
    }
}

/// Frame, window, take the DFT energy and apply the filterbank.
pub fn mel_features<T: Scalar>(signal: &AudioSignal<T>, spec: &FrameSpec, bank: &MelFilterbank<T>) -> Result<MelFeatures<T>> {
    if signal.sample_rate() != bank.sample_rate {
        return Err(Error::InvalidConfig(format!(
            "signal sample rate {} differs from filterbank rate {}",
            signal.sample_rate(),
            bank.sample_rate
        )));
    }
    let frames = spec.frames(signal)?;
    let dft = Dft::new(spec.frame_len)?;
    let mut data = Vec::with_capacity(frames.len() * bank.n_filters());
    for frame in &frames {
        data.extend(mel_energies(&dft.energy(frame)?, bank)?);
    }
    Ok(MelFeatures {
        values: Tensor::from_vec(vec![frames.len(), bank.n_filters()], data)?,
    })
}
