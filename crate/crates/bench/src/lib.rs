//! Synthetic benchmark harness for the multimodal recognition toolkit.
//!
//! Generates a seeded, modality-split synthetic action dataset, trains the
//! RGB and skeleton networks, evaluates single-modality and fused
//! accuracies on a held-out split, sweeps the fusion weight and renders
//! the results as CSV or a Markdown table. [`cli`] wires these steps to
//! the `mmrec` command.

pub mod cache;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod report;
pub mod sweep;

pub use config::HarnessConfig;
pub use error::{HarnessError, Result};
pub use report::ExperimentResult;
