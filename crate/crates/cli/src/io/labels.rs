//! Sound-event label CSV: one row per active label frame,
//! `frame_index,class_id,source_id,azimuth_deg,elevation_deg`
//! (trailing columns such as distance are ignored). A header row is
//! skipped if present.

use anyhow::{bail, Context, Result};
use std::path::Path;

pub type LabelRow = (u32, u32, u32, f64, f64);

pub fn read_label_csv(path: &Path) -> Result<Vec<LabelRow>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields[0].parse::<u32>().is_err() {
            continue; // header row
        }
        if fields.len() < 5 {
            bail!(
                "{}:{}: expected at least 5 columns, found {}",
                path.display(),
                lineno + 1,
                fields.len()
            );
        }
        let parse_err = |what: &str| {
            format!("{}:{}: bad {}", path.display(), lineno + 1, what)
        };
        rows.push((
            fields[0].parse::<u32>().with_context(|| parse_err("frame index"))?,
            fields[1].parse::<u32>().with_context(|| parse_err("class id"))?,
            fields[2].parse::<u32>().with_context(|| parse_err("source id"))?,
            fields[3].parse::<f64>().with_context(|| parse_err("azimuth"))?,
            fields[4].parse::<f64>().with_context(|| parse_err("elevation"))?,
        ));
    }
    Ok(rows)
}

pub fn write_label_csv(path: &Path, rows: &[LabelRow]) -> Result<()> {
    let mut out = String::new();
    for (f, c, s, az, el) in rows {
        out.push_str(&format!("{f},{c},{s},{az},{el}\n"));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
