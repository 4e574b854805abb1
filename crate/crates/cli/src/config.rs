//! Pipeline configuration: a TOML file can set every field, command-line
//! flags override file values, and the resolved configuration is hashed
//! into the manifest header so mixed runs are detectable.

use anyhow::{bail, Context, Result};
use sav_core::geometry::CameraSpec;
use sav_core::metrics::AlignConfig;
use sav_core::pipeline::{CurationConfig, DspConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// One recording to convert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingInput {
    pub recording_id: String,
    pub foa_wav: PathBuf,
    pub frames_dir: PathBuf,
    pub labels_csv: PathBuf,
}

/// Everything the toolkit needs for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct PipelineConfig {
    pub recordings: Vec<RecordingInput>,
    pub output_root: PathBuf,
    pub camera: CameraSpec,
    pub curation: CurationConfig,
    pub dsp: DspConfig,
    pub align: AlignConfig,
    /// Parallel window workers; 0 uses every available core.
    pub workers: usize,
}

impl PipelineConfig {
    pub fn load_toml(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        self.curation.validate()?;
        self.align.validate()?;
        if self.output_root.as_os_str().is_empty() {
            bail!("output_root is not set");
        }
        if self.recordings.is_empty() {
            bail!("no recordings configured");
        }
        for rec in &self.recordings {
            if rec.recording_id.is_empty() {
                bail!("a recording is missing its recording_id");
            }
            for (what, p) in [
                ("FOA WAV", &rec.foa_wav),
                ("frame directory", &rec.frames_dir),
                ("label CSV", &rec.labels_csv),
            ] {
                if !p.exists() {
                    bail!("{}: {} {} does not exist", rec.recording_id, what, p.display());
                }
            }
        }
        Ok(())
    }

    /// Stable hash of the resolved configuration.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for b in &digest[..8] {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}
