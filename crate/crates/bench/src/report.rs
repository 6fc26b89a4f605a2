//! Experiment results and their CSV / Markdown renderings.
//!
//! Table CSV:
//!
//! ```text
//! # seed=42 config_hash=0123456789abcdef
//! method,accuracy
//! 3D Conv Nets,45.73
//! ```
//!
//! Curve CSV: an `alpha,accuracy` header and one row per grid point.
//! Accuracies are percentages written with shortest round-trip precision.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const METHOD_RGB: &str = "3D Conv Nets";
pub const METHOD_SKELETON: &str = "Skeleton LSTM";
pub const METHOD_FUSED: &str = "3D ConvNets + Skeleton LSTM";
pub const METHOD_FUSED_SVM: &str = "3D ConvNets + Skeleton LSTM + SVM";

/// Row order of the accuracy table.
pub const METHODS: [&str; 4] = [METHOD_RGB, METHOD_SKELETON, METHOD_FUSED, METHOD_FUSED_SVM];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAccuracy {
    pub method: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub seed: u64,
    pub config_hash: String,
    pub methods: Vec<MethodAccuracy>,
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            _ => Err(HarnessError::Config(format!("unknown report format {s:?}; use csv or md"))),
        }
    }
}

fn csv_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Dataset(format!("report csv: {e}"))
}

impl ExperimentResult {
    /// Builds a result with the four standard rows, in table order.
    pub fn from_accuracies(seed: u64, config_hash: impl Into<String>, accuracies: [f64; 4]) -> Result<Self> {
        let r = ExperimentResult {
            seed,
            config_hash: config_hash.into(),
            methods: METHODS
                .iter()
                .zip(accuracies)
                .map(|(m, a)| MethodAccuracy {
                    method: m.to_string(),
                    accuracy: a,
                })
                .collect(),
            curve: Vec::new(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |a: f64| (0.0..=100.0).contains(&a);
        if let Some(m) = self.methods.iter().find(|m| !in_range(m.accuracy)) {
            return Err(HarnessError::Config(format!("accuracy {} for {} outside [0, 100]", m.accuracy, m.method)));
        }
        if let Some(p) = self.curve.iter().find(|p| !in_range(p.accuracy) || !(0.0..=1.0).contains(&p.alpha)) {
            return Err(HarnessError::Config(format!("curve point alpha={} accuracy={} out of range", p.alpha, p.accuracy)));
        }
        Ok(())
    }

    pub fn accuracy(&self, method: &str) -> Option<f64> {
        self.methods.iter().find(|m| m.method == method).map(|m| m.accuracy)
    }

    /// The Markdown accuracy table, accuracies to two decimals.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Method | Result /% |\n| --- | ---: |\n");
        for m in &self.methods {
            out.push_str(&format!("| {} | {:.2} |\n", m.method, m.accuracy));
        }
        out
    }

    pub fn table_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "accuracy"]).map_err(csv_err)?;
        for m in &self.methods {
            w.write_record([m.method.as_str(), &m.accuracy.to_string()]).map_err(csv_err)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)?;
        Ok(format!("# seed={} config_hash={}\n{body}", self.seed, self.config_hash))
    }

    /// The alpha curve as CSV, or `None` for an empty sweep.
    pub fn curve_csv(&self) -> Result<Option<String>> {
        if self.curve.is_empty() {
            return Ok(None);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["alpha", "accuracy"]).map_err(csv_err)?;
        for p in &self.curve {
            w.write_record([p.alpha.to_string(), p.accuracy.to_string()]).map_err(csv_err)?;
        }
        Ok(Some(String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)?))
    }

    pub fn from_csv(table: &str, curve: Option<&str>) -> Result<Self> {
        let (meta, body) = table
            .split_once('\n')
            .ok_or_else(|| csv_err("missing metadata line"))?;
        let meta = meta.strip_prefix("# ").ok_or_else(|| csv_err("metadata line must start with '# '"))?;
        let (mut seed, mut hash) = (None, None);
        for field in meta.split_whitespace() {
            match field.split_once('=') {
                Some(("seed", v)) => seed = Some(v.parse::<u64>().map_err(csv_err)?),
                Some(("config_hash", v)) => hash = Some(v.to_string()),
                _ => return Err(csv_err(format!("unexpected metadata field {field:?}"))),
            }
        }
        let mut methods = Vec::new();
        let mut r = csv::Reader::from_reader(body.as_bytes());
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 2 {
                return Err(csv_err("table rows need method,accuracy"));
            }
            methods.push(MethodAccuracy {
                method: rec[0].to_string(),
                accuracy: rec[1].parse().map_err(csv_err)?,
            });
        }
        let mut points = Vec::new();
        if let Some(text) = curve {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            for rec in r.records() {
                let rec = rec.map_err(csv_err)?;
                if rec.len() != 2 {
                    return Err(csv_err("curve rows need alpha,accuracy"));
                }
                points.push(CurvePoint {
                    alpha: rec[0].parse().map_err(csv_err)?,
                    accuracy: rec[1].parse().map_err(csv_err)?,
                });
            }
        }
        let result = ExperimentResult {
            seed: seed.ok_or_else(|| csv_err("missing seed"))?,
            config_hash: hash.ok_or_else(|| csv_err("missing config_hash"))?,
            methods,
            curve: points,
        };
        result.validate()?;
        Ok(result)
    }
}
