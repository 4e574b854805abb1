//! `eval-align`: Spatial AV-Align over ingested detection and sound-event
//! record files, reported per clip and aggregated.

use crate::io::records::{read_jsonl, DetectionRecord, SeldRecord};
use anyhow::{Context, Result};
use sav_core::metrics::{
    pool_align, spatial_av_align, AlignConfig, AlignResult, BoundingBox, DetectionTrack,
    SeldTrack,
};
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    /// Sum TP/FN over clips, then score.
    Pooled,
    /// Average the defined per-clip scores.
    Mean,
}

pub struct EvalAlignArgs {
    pub detections: PathBuf,
    pub seld: PathBuf,
    pub config: AlignConfig,
    /// Minimum video frames per clip; higher frame indices extend it.
    pub video_frames: usize,
    /// Minimum audio frames per clip.
    pub audio_frames: usize,
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub aggregate: Aggregate,
}

impl Default for EvalAlignArgs {
    fn default() -> Self {
        EvalAlignArgs {
            detections: PathBuf::new(),
            seld: PathBuf::new(),
            config: AlignConfig::default(),
            video_frames: 20,
            audio_frames: 50,
            canvas_width: 256.0,
            canvas_height: 256.0,
            aggregate: Aggregate::Pooled,
        }
    }
}

#[derive(Debug)]
pub struct AlignReport {
    pub per_clip: Vec<(String, AlignResult)>,
    pub pooled: AlignResult,
    /// Mean of defined per-clip scores, when any clip has one.
    pub mean: Option<f64>,
}

pub fn run(args: &EvalAlignArgs) -> Result<AlignReport> {
    args.config.validate()?;
    let detections: Vec<DetectionRecord> = read_jsonl(&args.detections)?;
    let events: Vec<SeldRecord> = read_jsonl(&args.seld)?;

    let mut det_by_clip: BTreeMap<&str, Vec<&DetectionRecord>> = BTreeMap::new();
    for d in &detections {
        det_by_clip.entry(&d.clip_id).or_default().push(d);
    }
    let mut seld_by_clip: BTreeMap<&str, Vec<&SeldRecord>> = BTreeMap::new();
    for e in &events {
        seld_by_clip.entry(&e.clip_id).or_default().push(e);
    }
    let clip_ids: BTreeSet<&str> = det_by_clip
        .keys()
        .chain(seld_by_clip.keys())
        .copied()
        .collect();

    let mut per_clip = Vec::new();
    for clip in clip_ids {
        let dets = det_by_clip.get(clip).map_or(&[][..], |v| v.as_slice());
        let evs = seld_by_clip.get(clip).map_or(&[][..], |v| v.as_slice());
        let n_video = dets
            .iter()
            .map(|d| d.frame_index + 1)
            .max()
            .unwrap_or(0)
            .max(args.video_frames);
        let n_audio = evs
            .iter()
            .map(|e| e.frame_index + 1)
            .max()
            .unwrap_or(0)
            .max(args.audio_frames);
        let mut det_track = DetectionTrack::new(n_video, args.canvas_width, args.canvas_height);
        for d in dets {
            det_track
                .push_box(
                    d.frame_index,
                    BoundingBox {
                        class: d.class.clone(),
                        x1: d.x1,
                        y1: d.y1,
                        x2: d.x2,
                        y2: d.y2,
                        score: d.score,
                    },
                )
                .with_context(|| format!("clip {clip}, video frame {}", d.frame_index))?;
        }
        let mut seld_track = SeldTrack::new(n_audio);
        for e in evs {
            seld_track
                .set(&e.class, e.frame_index, e.activity, e.x)
                .with_context(|| format!("clip {clip}, audio frame {}", e.frame_index))?;
        }
        per_clip.push((clip.to_string(), spatial_av_align(&det_track, &seld_track, &args.config)));
    }

    let pooled = pool_align(&per_clip.iter().map(|(_, r)| *r).collect::<Vec<_>>());
    let defined: Vec<f64> = per_clip.iter().filter_map(|(_, r)| r.score()).collect();
    let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(AlignReport {
        per_clip,
        pooled,
        mean,
    })
}

pub fn print_report(report: &AlignReport, aggregate: Aggregate) {
    for (clip, result) in &report.per_clip {
        match result.score() {
            Some(s) => println!(
                "clip {clip}: {s:.4} (tp={}, fn={})",
                result.true_positives, result.false_negatives
            ),
            None => println!("clip {clip}: undefined (no active sound events)"),
        }
    }
    match aggregate {
        Aggregate::Pooled => match report.pooled.score() {
            Some(s) => println!(
                "pooled: {s:.4} (tp={}, fn={})",
                report.pooled.true_positives, report.pooled.false_negatives
            ),
            None => println!("pooled: undefined"),
        },
        Aggregate::Mean => match report.mean {
            Some(m) => println!("mean: {m:.4}"),
            None => println!("mean: undefined"),
        },
    }
}
