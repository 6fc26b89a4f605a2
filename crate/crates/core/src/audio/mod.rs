//! Audio front-end: framing, DFT energy spectrum, mel filterbank energies
//! and a binary detector head for special-pedestrian voice cues.

pub mod detector;
pub mod filterbank;
pub mod frames;
pub mod io;
pub mod spectrum;

pub use detector::{audio_recognize, AudioDetection, AudioHead, DEFAULT_THRESHOLD, SPECIAL};
pub use filterbank::{mel_energies, mel_features, MelFeatures, MelFilterbank, ENERGY_FLOOR};
pub use frames::{AudioSignal, FrameSpec, WindowKind, DEFAULT_SAMPLE_RATE};
pub use spectrum::{dft_energy, hz_to_mel, mel_to_hz, Dft};
