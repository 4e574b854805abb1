//! The clip manifest: a JSON header line followed by one JSON
//! [`ClipRecord`] per line, sorted by clip id.

use anyhow::{bail, Context, Result};
use sav_core::pipeline::ClipRecord;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MANIFEST_FORMAT: &str = "sav-manifest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub format: String,
    pub tool_version: String,
    pub config_hash: String,
}

impl ManifestHeader {
    pub fn new(config_hash: String) -> Self {
        ManifestHeader {
            format: MANIFEST_FORMAT.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
        }
    }
}

/// Writes the header plus records. Records are sorted by clip id first so
/// repeated runs produce byte-identical files regardless of worker
/// scheduling.
pub fn write_manifest(path: &Path, header: &ManifestHeader, records: &mut [ClipRecord]) -> Result<()> {
    records.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    let mut out = serde_json::to_string(header)?;
    out.push('\n');
    for record in records.iter() {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_manifest(path: &Path) -> Result<(ManifestHeader, Vec<ClipRecord>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let Some((_, first)) = lines.next() else {
        bail!("{}: empty manifest", path.display());
    };
    let header: ManifestHeader = serde_json::from_str(first)
        .with_context(|| format!("{}:1: bad manifest header", path.display()))?;
    if header.format != MANIFEST_FORMAT {
        bail!("{}: unknown manifest format {:?}", path.display(), header.format);
    }
    let mut records = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(line)
                .with_context(|| format!("{}:{}: malformed record", path.display(), lineno + 1))?,
        );
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sav_core::pipeline::{ClipWindow, Verdict};

    fn record(start_s: f64, yaw_deg: f64) -> ClipRecord {
        let window = ClipWindow { start_s, yaw_deg };
        ClipRecord {
            clip_id: sav_core::pipeline::clip_id("rec", &window),
            recording_id: "rec".into(),
            start_s,
            yaw_deg,
            verdict: Verdict::Keep,
            dominant_class: None,
            labels: vec![],
            audio_path: None,
            frame_paths: vec![],
        }
    }

    #[test]
    fn manifest_roundtrips_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let header = ManifestHeader::new("cafe1234".into());
        let mut records = vec![record(1.0, 350.0), record(0.0, 10.0), record(0.5, 0.0)];
        write_manifest(&path, &header, &mut records).unwrap();
        let (back_header, back_records) = read_manifest(&path).unwrap();
        assert_eq!(back_header, header);
        assert_eq!(back_records.len(), 3);
        assert!(back_records.windows(2).all(|w| w[0].clip_id < w[1].clip_id));
        assert_eq!(back_records, records);
    }

    #[test]
    fn rejects_foreign_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("other.jsonl");
        std::fs::write(&path, "{\"format\":\"other\",\"tool_version\":\"0\",\"config_hash\":\"x\"}\n").unwrap();
        assert!(read_manifest(&path).is_err());
    }
}
