//! Line-delimited record files for ingested detections and sound-event
//! localization output. One JSON object per line; field names and units
//! are normative:
//!
//! - detection: `{clip_id, frame_index, class, x1, y1, x2, y2, score}`
//!   with box coordinates in padded-canvas pixels at 4 fps;
//! - sound event: `{clip_id, frame_index, class, activity, x}` at 10 fps,
//!   `x` normalized to [0, 1] across the image width.

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub clip_id: String,
    pub frame_index: usize,
    pub class: String,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeldRecord {
    pub clip_id: String,
    pub frame_index: usize,
    pub class: String,
    pub activity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

/// Reads a line-delimited JSON file; parse failures name the line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut items = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        items.push(
            serde_json::from_str(line)
                .with_context(|| format!("{}:{}: malformed record", path.display(), lineno + 1))?,
        );
    }
    Ok(items)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("det.jsonl");
        let records = vec![DetectionRecord {
            clip_id: "c1".into(),
            frame_index: 3,
            class: "person".into(),
            x1: 10.0,
            y1: 60.0,
            x2: 50.0,
            y2: 200.0,
            score: 0.88,
        }];
        write_jsonl(&path, &records).unwrap();
        let back: Vec<DetectionRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn malformed_lines_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"clip_id\":\"c\",\"frame_index\":0,\"class\":\"speech\",\"activity\":1.0,\"x\":0.5}\nnot json\n",
        )
        .unwrap();
        let err = read_jsonl::<SeldRecord>(&path).unwrap_err().to_string();
        assert!(err.contains(":2"), "{err}");
    }

    #[test]
    fn seld_position_field_is_optional() {
        let line = "{\"clip_id\":\"c\",\"frame_index\":1,\"class\":\"speech\",\"activity\":0.2}";
        let rec: SeldRecord = serde_json::from_str(line).unwrap();
        assert_eq!(rec.x, None);
    }
}
