//! Mel scale and DFT energy spectrum.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `2595 * log10(1 + hz / 700)`.
pub fn hz_to_mel<T: Scalar>(hz: T) -> Result<T> {
    if !hz.is_finite() || hz < T::zero() {
        return Err(Error::InvalidConfig(format!("frequency must be finite and >= 0, got {}", hz.as_f64())));
    }
    Ok(T::of(2595.0) * (T::one() + hz / T::of(700.0)).log10())
}

/// Inverse of [`hz_to_mel`].
pub fn mel_to_hz<T: Scalar>(mel: T) -> Result<T> {
    if !mel.is_finite() || mel < T::zero() {
        return Err(Error::InvalidConfig(format!("mel value must be finite and >= 0, got {}", mel.as_f64())));
    }
    Ok(T::of(700.0) * (T::of(10.0).powf(mel / T::of(2595.0)) - T::one()))
}

/// Direct O(n^2) DFT of a fixed length with a precomputed twiddle table.
///
/// The phase `2*pi*r*i/n` is reduced modulo `n` as an integer before the
/// table lookup, so large indices lose no accuracy.
#[derive(Debug, Clone)]
pub struct Dft<T = f64> {
    n: usize,
    cos: Vec<T>,
    sin: Vec<T>,
}

impl<T: Scalar> Dft<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("dft"));
        }
        let step = 2.0 * std::f64::consts::PI / n as f64;
        let (cos, sin) = (0..n).map(|k| (T::of((step * k as f64).cos()), T::of((step * k as f64).sin()))).unzip();
        Ok(Dft { n, cos, sin })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `|U(r)|^2` for `r` in `0..n`, where `U(r) = sum_i x(i) e^{-j 2 pi r i / n}`.
    pub fn energy(&self, frame: &[T]) -> Result<Vec<T>> {
        if frame.len() != self.n {
            return Err(Error::shape("dft", format!("frame length {} != transform length {}", frame.len(), self.n)));
        }
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        for r in 0..n {
            let (mut re, mut im) = (T::zero(), T::zero());
            let mut k = 0;
            for &x in frame {
                re += x * self.cos[k];
                im -= x * self.sin[k];
                k += r;
                if k >= n {
                    k -= n;
                }
            }
            out.push(re * re + im * im);
        }
        Ok(out)
    }
}

/// Energy spectrum of one frame; length equals the frame length.
pub fn dft_energy<T: Scalar>(frame: &[T]) -> Result<Vec<T>> {
    if frame.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dft frame"));
    }
    Dft::new(frame.len())?.energy(frame)
}
