//! CSV export of per-video fusion results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::ProbVector;

/// One row: `video_id,p_0,...,p_{k-1},decision`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionRecord {
    pub video_id: String,
    pub probs: ProbVector<f64>,
    pub decision: usize,
}

pub fn fusion_records_to_csv(records: &[FusionRecord]) -> Result<String> {
    let k = records.first().map_or(0, |r| r.probs.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::format("fusion csv", e.to_string());
    let mut header = vec!["video_id".to_string()];
    header.extend((0..k).map(|c| format!("p_{c}")));
    header.push("decision".into());
    w.write_record(&header).map_err(err)?;
    for r in records {
        if r.probs.len() != k {
            return Err(Error::shape("fusion csv", format!("record {} has {} classes, expected {k}", r.video_id, r.probs.len())));
        }
        let mut row = vec![r.video_id.clone()];
        row.extend(r.probs.as_slice().iter().map(|p| p.to_string()));
        row.push(r.decision.to_string());
        w.write_record(&row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format("fusion csv", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::format("fusion csv", e.to_string()))
}

pub fn fusion_records_from_csv(text: &str) -> Result<Vec<FusionRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |d: String| Error::format("fusion csv", d);
    let width = r.headers().map_err(|e| bad(e.to_string()))?.len();
    if width < 3 {
        return Err(bad(format!("expected video_id, probabilities and decision columns, got {width}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let probs = (1..width - 1)
            .map(|c| rec[c].trim().parse::<f64>().map_err(|_| bad(format!("bad probability {:?}", &rec[c]))))
            .collect::<Result<Vec<_>>>()?;
        let decision = rec[width - 1]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad decision {:?}", &rec[width - 1])))?;
        out.push(FusionRecord {
            video_id: rec[0].to_string(),
            probs: ProbVector::new(probs)?,
            decision,
        });
    }
    Ok(out)
}
