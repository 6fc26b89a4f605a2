//! Skeleton file formats.
//!
//! - JSON: `{"joints": J, "spine_index": k, "head_index": h, "frames": [[[x,y,z] x J] x T]}`;
//!   `head_index` is optional and defaults to the Kinect head joint.
//! - CSV: `T` rows of `3J` comma-separated values (`x0,y0,z0,x1,...`), no
//!   header row, with a JSON sidecar `{"joints", "spine_index", "head_index"}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{SkeletonSequence, DEFAULT_HEAD_INDEX};
use crate::csvio::{read_rows, write_rows};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Serialize, Deserialize)]
struct SkeletonJson {
    joints: usize,
    spine_index: usize,
    #[serde(default = "default_head")]
    head_index: usize,
    frames: Vec<Vec<[f64; 3]>>,
}

/// Sidecar metadata for the CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonHeader {
    pub joints: usize,
    pub spine_index: usize,
    #[serde(default = "default_head")]
    pub head_index: usize,
}

fn default_head() -> usize {
    DEFAULT_HEAD_INDEX
}

impl SkeletonSequence<f64> {
    pub fn header(&self) -> SkeletonHeader {
        SkeletonHeader {
            joints: self.joints(),
            spine_index: self.spine_index(),
            head_index: self.head_index(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let j = self.joints();
        let frames = self
            .frames()
            .data()
            .chunks_exact(3 * j)
            .map(|f| f.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect())
            .collect();
        let doc = SkeletonJson {
            joints: j,
            spine_index: self.spine_index(),
            head_index: self.head_index(),
            frames,
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SkeletonJson = serde_json::from_str(text)?;
        if doc.frames.is_empty() {
            return Err(Error::format("skeleton json", "no frames"));
        }
        let mut data = Vec::with_capacity(doc.frames.len() * doc.joints * 3);
        for (t, frame) in doc.frames.iter().enumerate() {
            if frame.len() != doc.joints {
                return Err(Error::format(
                    "skeleton json",
                    format!("frame {t} has {} joints, header says {}", frame.len(), doc.joints),
                ));
            }
            data.extend(frame.iter().flatten());
        }
        let frames = Tensor::from_vec(vec![doc.frames.len(), doc.joints, 3], data)?;
        SkeletonSequence::new(frames, doc.spine_index, doc.head_index)
    }

    /// CSV body; pair it with [`header`](Self::header) as the sidecar.
    pub fn to_csv(&self) -> Result<String> {
        write_rows::<f64>(None, self.frames().data().chunks_exact(3 * self.joints()))
    }

    pub fn from_csv(body: &str, header: SkeletonHeader) -> Result<Self> {
        let (rows, data) = read_rows("skeleton csv", body, 3 * header.joints, false)?;
        let frames = Tensor::from_vec(vec![rows, header.joints, 3], data)?;
        SkeletonSequence::new(frames, header.spine_index, header.head_index)
    }

    /// Writes `<stem>.csv` and `<stem>.json` (sidecar) into `dir`.
    pub fn write_csv_pair(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv()?)?;
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string(&self.header())?)?;
        Ok(())
    }

    pub fn read_csv_pair(dir: &Path, stem: &str) -> Result<Self> {
        let header: SkeletonHeader = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        Self::from_csv(&std::fs::read_to_string(dir.join(format!("{stem}.csv")))?, header)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SkeletonSequence<f64> {
        let data: Vec<f64> = (0..2 * 4 * 3).map(|v| v as f64 * 0.1 - 0.7).collect();
        SkeletonSequence::new(Tensor::from_vec(vec![2, 4, 3], data).unwrap(), 1, 3).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        assert_eq!(SkeletonSequence::from_json(&s.to_json().unwrap()).unwrap(), s);
    }

    #[test]
    fn json_defaults_head_and_checks_joints() {
        let text = r#"{"joints": 4, "spine_index": 1, "frames": [[[0,0,0],[0,0,0],[0,0,0],[0,1,0]]]}"#;
        let s = SkeletonSequence::from_json(text).unwrap();
        assert_eq!(s.head_index(), DEFAULT_HEAD_INDEX);
        let bad = r#"{"joints": 4, "spine_index": 1, "frames": [[[0,0,0]]]}"#;
        assert!(SkeletonSequence::from_json(bad).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = sample();
        assert_eq!(SkeletonSequence::from_csv(&s.to_csv().unwrap(), s.header()).unwrap(), s);
        assert!(SkeletonSequence::from_csv("1,2,3\n", s.header()).is_err());
    }
}
