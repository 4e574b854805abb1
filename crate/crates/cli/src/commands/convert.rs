//! `convert`: enumerate windows over each recording, project and curate
//! labels, render kept clips, and write media, manifest, and stats.

use crate::config::{PipelineConfig, RecordingInput};
use crate::io::{frames, frames::FrameDir, labels::read_label_csv, wav};
use crate::manifest::{write_manifest, ManifestHeader};
use anyhow::{Context, Result};
use rayon::prelude::*;
use sav_core::geometry::{build_projection_map, SamplingGrid, ViewAngle};
use sav_core::pipeline::{
    enumerate_windows, manifest_stats, process_window, AnnotationTrack, ClipRecord, FrameSource,
    ManifestStats,
};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

pub struct ConvertOutcome {
    pub stats: ManifestStats,
    pub manifest_path: PathBuf,
    /// Recordings that failed entirely, with their error text.
    pub failures: Vec<(String, String)>,
}

pub fn run(config: &PipelineConfig) -> Result<ConvertOutcome> {
    config.validate()?;
    std::fs::create_dir_all(config.output_root.join("clips"))?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for rec in &config.recordings {
        match convert_recording(rec, config) {
            Ok(mut r) => records.append(&mut r),
            Err(e) => {
                eprintln!("recording {}: {e:#}", rec.recording_id);
                failures.push((rec.recording_id.clone(), format!("{e:#}")));
            }
        }
    }
    let header = ManifestHeader::new(config.config_hash());
    let manifest_path = config.output_root.join("manifest.jsonl");
    write_manifest(&manifest_path, &header, &mut records)?;
    let stats = manifest_stats(&records);
    std::fs::write(config.output_root.join("stats.txt"), stats.to_string())?;
    Ok(ConvertOutcome {
        stats,
        manifest_path,
        failures,
    })
}

fn convert_recording(rec: &RecordingInput, config: &PipelineConfig) -> Result<Vec<ClipRecord>> {
    let foa = wav::read_foa(&rec.foa_wav)?;
    let frame_dir = FrameDir::open(&rec.frames_dir)?;
    let rows = read_label_csv(&rec.labels_csv)?;

    // Enumerate only windows covered by both audio and frames. The last
    // rendered frame of a window sits 1/CLIP_VIDEO_FPS before the window
    // end, and the final source frame covers half a source period.
    let audio_end = foa.len() as f64 / foa.sample_rate() as f64;
    let video_end = frame_dir.frame_times().last().unwrap() + 0.5 / frame_dir.nominal_fps();
    let duration = audio_end.min(video_end + 1.0 / sav_core::pipeline::CLIP_VIDEO_FPS as f64);
    let track = AnnotationTrack::from_rows(rec.recording_id.clone(), duration, &rows);
    let windows = enumerate_windows(duration, &config.curation);

    let first = frame_dir.frame(0)?;
    let mut grids: BTreeMap<u64, Arc<SamplingGrid>> = BTreeMap::new();
    for window in &windows {
        if let std::collections::btree_map::Entry::Vacant(slot) =
            grids.entry(window.yaw_deg.to_bits())
        {
            slot.insert(Arc::new(build_projection_map(
                &config.camera,
                ViewAngle::new(window.yaw_deg),
                first.width(),
                first.height(),
            )?));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .context("building worker pool")?;
    let clips_dir = config.output_root.join("clips");
    pool.install(|| {
        windows
            .par_iter()
            .map(|window| -> Result<ClipRecord> {
                let grid = &grids[&window.yaw_deg.to_bits()];
                let (mut record, media) = process_window(
                    &foa,
                    &frame_dir,
                    &track,
                    window,
                    &config.camera,
                    grid,
                    &config.curation,
                    &config.dsp,
                )
                .with_context(|| {
                    format!(
                        "window t={:.2}s yaw={:.1}",
                        window.start_s, window.yaw_deg
                    )
                })?;
                if let Some(clip) = media {
                    let dir = clips_dir.join(&record.clip_id);
                    std::fs::create_dir_all(&dir)?;
                    wav::write_wav_i16(&dir.join("audio.wav"), &clip.audio)?;
                    record.audio_path = Some(format!("clips/{}/audio.wav", record.clip_id));
                    for (k, frame) in clip.frames.iter().enumerate() {
                        let name = format!("frame_{k:02}.png");
                        frames::write_png(&dir.join(&name), frame)?;
                        record
                            .frame_paths
                            .push(format!("clips/{}/{}", record.clip_id, name));
                    }
                }
                Ok(record)
            })
            .collect()
    })
}
