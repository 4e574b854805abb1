//! Frame directories: pre-extracted 8-bit RGB images plus a `frames.json`
//! sidecar describing their timing.
//!
//! Sidecar schema:
//! `{ "fps": 29.97, "start_time": 0.0, "files": ["f000001.png", ...] }`
//! The time of `files[i]` is `start_time + i / fps`.

use anyhow::{bail, Context, Result};
use sav_core::pipeline::FrameSource;
use sav_core::raster::RgbImage;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

pub const SIDECAR_NAME: &str = "frames.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSidecar {
    pub fps: f64,
    #[serde(default)]
    pub start_time: f64,
    pub files: Vec<String>,
}

/// Lazily loaded, cached frame directory.
pub struct FrameDir {
    dir: PathBuf,
    files: Vec<String>,
    times: Vec<f64>,
    fps: f64,
    cache: Mutex<HashMap<usize, Arc<RgbImage>>>,
}

const CACHE_CAPACITY: usize = 96;

impl FrameDir {
    pub fn open(dir: &Path) -> Result<Self> {
        let sidecar_path = dir.join(SIDECAR_NAME);
        let text = std::fs::read_to_string(&sidecar_path)
            .with_context(|| format!("reading {}", sidecar_path.display()))?;
        let sidecar: FrameSidecar = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", sidecar_path.display()))?;
        if !(sidecar.fps > 0.0) {
            bail!("{}: fps must be positive", sidecar_path.display());
        }
        if sidecar.files.is_empty() {
            bail!("{}: no frames listed", sidecar_path.display());
        }
        let times = (0..sidecar.files.len())
            .map(|i| sidecar.start_time + i as f64 / sidecar.fps)
            .collect();
        Ok(FrameDir {
            dir: dir.to_path_buf(),
            files: sidecar.files,
            times,
            fps: sidecar.fps,
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn load(&self, index: usize) -> Result<RgbImage> {
        let path = self.dir.join(&self.files[index]);
        let img = image::open(&path)
            .with_context(|| format!("decoding {}", path.display()))?
            .to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        Ok(RgbImage::from_raw(w, h, img.into_raw())?)
    }
}

impl FrameSource for FrameDir {
    fn frame_times(&self) -> &[f64] {
        &self.times
    }

    fn frame(&self, index: usize) -> sav_core::Result<Arc<RgbImage>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&index) {
            return Ok(hit.clone());
        }
        let loaded = Arc::new(
            self.load(index)
                .map_err(|e| sav_core::Error::InvalidArgument(format!("{e:#}")))?,
        );
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(index, loaded.clone());
        Ok(loaded)
    }

    fn nominal_fps(&self) -> f64 {
        self.fps
    }
}

/// Writes one frame as PNG.
pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    let buffer = image::RgbImage::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.data().to_vec(),
    )
    .expect("raster buffer length is checked on construction");
    buffer
        .save_with_format(path, image::ImageFormat::Png)
        .with_context(|| format!("writing {}", path.display()))
}

/// Writes a frame directory with uniform timing; used by fixtures and the
/// conversion tests.
pub fn write_frame_dir(dir: &Path, frames: &[RgbImage], fps: f64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let name = format!("frame_{i:06}.png");
        write_png(&dir.join(&name), frame)?;
        files.push(name);
    }
    let sidecar = FrameSidecar {
        fps,
        start_time: 0.0,
        files,
    };
    std::fs::write(
        dir.join(SIDECAR_NAME),
        serde_json::to_string_pretty(&sidecar)?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: usize, h: usize, seed: u8) -> RgbImage {
        let mut img = RgbImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                img.set_pixel(x, y, [x as u8, y as u8, seed]);
            }
        }
        img
    }

    #[test]
    fn frame_dir_roundtrip_and_timing() {
        let dir = tempfile::tempdir().unwrap();
        let frames: Vec<RgbImage> = (0..5).map(|i| gradient(16, 8, i)).collect();
        write_frame_dir(dir.path(), &frames, 4.0).unwrap();

        let fd = FrameDir::open(dir.path()).unwrap();
        assert_eq!(fd.frame_times().len(), 5);
        assert!((fd.frame_times()[4] - 1.0).abs() < 1e-12);
        let img = fd.frame(2).unwrap();
        assert_eq!(img.pixel(3, 1), [3, 1, 2]);
        // Cached access returns the same allocation.
        let again = fd.frame(2).unwrap();
        assert!(Arc::ptr_eq(&img, &again));
    }

    #[test]
    fn missing_sidecar_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(FrameDir::open(dir.path()).is_err());
    }
}
