//! Alpha grids and the alpha sweep over cached per-modality probabilities.

use std::fmt;
use std::str::FromStr;

use mmrec_core::fusion::{alpha_fuse, FusionConfig};

use crate::cache::ProbabilityCache;
use crate::error::{HarnessError, Result};
use crate::report::CurvePoint;

/// Sorted, de-duplicated alpha values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid(Vec<f64>);

impl Default for AlphaGrid {
    fn default() -> Self {
        "0:1:0.1".parse().expect("default grid is valid")
    }
}

/// Rounds to 12 decimals so `0:1:0.1` yields `0.3` rather than `0.30000000000000004`.
fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl AlphaGrid {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(HarnessError::Config(format!("alpha {v} outside [0, 1]")));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        values.dedup();
        Ok(AlphaGrid(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for AlphaGrid {
    type Err = HarnessError;

    /// `start:stop:step` (inclusive of `stop`) or a comma-separated list;
    /// an empty string is an empty grid.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| HarnessError::Config(format!("bad alpha grid value {t:?}")))
        };
        if s.is_empty() {
            return Ok(AlphaGrid(Vec::new()));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step <= 0.0 || stop < start {
                    return Err(HarnessError::Config(format!("alpha grid {s:?} needs step > 0 and stop >= start")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| tidy(start + i as f64 * step)).collect()
            }
            [_] => s.split(',').map(num).collect::<Result<Vec<_>>>()?,
            _ => return Err(HarnessError::Config(format!("alpha grid {s:?} is neither start:stop:step nor a list"))),
        };
        AlphaGrid::new(values)
    }
}

impl fmt::Display for AlphaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Percentage of `labels` matched by the argmax of `probs`.
pub fn accuracy_percent(decisions: impl Iterator<Item = usize>, labels: &[usize]) -> f64 {
    let hits = decisions.zip(labels).filter(|(d, l)| d == *l).count();
    100.0 * hits as f64 / labels.len().max(1) as f64
}

/// Accuracy of `alpha * rgb + (1 - alpha) * skeleton` on the cached split.
pub fn fused_accuracy(cache: &ProbabilityCache, alpha: f64) -> Result<f64> {
    let cfg = FusionConfig::new(alpha)?;
    let decisions = cache
        .rgb
        .iter()
        .zip(&cache.skeleton)
        .map(|(p, q)| alpha_fuse(p, q, cfg).map(|f| f.decision()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(accuracy_percent(decisions.into_iter(), &cache.labels))
}

/// Fused accuracy at every grid point; no retraining.
pub fn sweep_alpha(cache: &ProbabilityCache, grid: &AlphaGrid) -> Result<Vec<CurvePoint>> {
    grid.values()
        .iter()
        .map(|&alpha| {
            Ok(CurvePoint {
                alpha,
                accuracy: fused_accuracy(cache, alpha)?,
            })
        })
        .collect()
}
