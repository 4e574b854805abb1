//! `stats`: summarize an existing manifest.

use crate::manifest::{read_manifest, ManifestHeader};
use anyhow::Result;
use sav_core::pipeline::{manifest_stats, ManifestStats};
use std::path::Path;

pub fn run(manifest: &Path) -> Result<(ManifestHeader, ManifestStats)> {
    let (header, records) = read_manifest(manifest)?;
    Ok((header, manifest_stats(&records)))
}
