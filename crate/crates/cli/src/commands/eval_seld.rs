//! `eval-seld`: frame-level F-score and masked position MSE of
//! localization predictions against reference labels. Both files use the
//! sound-event record schema; per clip the two files must agree on the
//! frame count (max frame index + 1).

use crate::io::records::{read_jsonl, SeldRecord};
use anyhow::{bail, Context, Result};
use sav_core::metrics::{seld_fscore, seld_masked_mse, LabelTrack, SeldTrack};
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

pub struct EvalSeldArgs {
    pub predictions: PathBuf,
    pub labels: PathBuf,
    /// Activity threshold for both the predicted and the label activity.
    pub threshold: f64,
}

#[derive(Debug)]
pub struct SeldEvalReport {
    pub clips: usize,
    pub fscores: BTreeMap<String, Option<f64>>,
    pub masked_mse: Option<f64>,
}

fn group<'a>(records: &'a [SeldRecord]) -> BTreeMap<&'a str, Vec<&'a SeldRecord>> {
    let mut by_clip: BTreeMap<&str, Vec<&SeldRecord>> = BTreeMap::new();
    for r in records {
        by_clip.entry(&r.clip_id).or_default().push(r);
    }
    by_clip
}

fn frame_count(records: &[&SeldRecord]) -> usize {
    records.iter().map(|r| r.frame_index + 1).max().unwrap_or(0)
}

pub fn run(args: &EvalSeldArgs) -> Result<SeldEvalReport> {
    let predictions: Vec<SeldRecord> = read_jsonl(&args.predictions)?;
    let labels: Vec<SeldRecord> = read_jsonl(&args.labels)?;
    let pred_by_clip = group(&predictions);
    let label_by_clip = group(&labels);
    let clip_ids: BTreeSet<&str> = pred_by_clip
        .keys()
        .chain(label_by_clip.keys())
        .copied()
        .collect();

    // Per-clip frame counts must agree; clips are then concatenated onto
    // one timeline so scores aggregate over the corpus.
    let empty = Vec::new();
    let mut offsets = Vec::new();
    let mut total_frames = 0usize;
    for clip in &clip_ids {
        let p = frame_count(pred_by_clip.get(clip).unwrap_or(&empty));
        let l = frame_count(label_by_clip.get(clip).unwrap_or(&empty));
        if p != l {
            bail!("clip {clip}: predictions cover {p} frames but labels cover {l}");
        }
        offsets.push(total_frames);
        total_frames += l;
    }

    let mut pred_track = SeldTrack::new(total_frames);
    let mut label_track = LabelTrack::new(total_frames);
    for (clip, offset) in clip_ids.iter().zip(&offsets) {
        for r in pred_by_clip.get(clip).unwrap_or(&empty) {
            pred_track
                .set(&r.class, offset + r.frame_index, r.activity, r.x)
                .with_context(|| format!("clip {clip}, frame {}", r.frame_index))?;
        }
        for r in label_by_clip.get(clip).unwrap_or(&empty) {
            if r.activity >= args.threshold {
                let Some(x) = r.x else {
                    bail!(
                        "clip {clip}, frame {}: active label without a position",
                        r.frame_index
                    );
                };
                label_track
                    .set_active(&r.class, offset + r.frame_index, x)
                    .with_context(|| format!("clip {clip}, frame {}", r.frame_index))?;
            }
        }
    }

    let fscores = seld_fscore(&pred_track, &label_track, args.threshold)?;
    let masked_mse = seld_masked_mse(&pred_track, &label_track)?;
    Ok(SeldEvalReport {
        clips: clip_ids.len(),
        fscores,
        masked_mse,
    })
}

pub fn print_report(report: &SeldEvalReport) {
    println!("clips: {}", report.clips);
    for (class, f) in &report.fscores {
        match f {
            Some(f) => println!("f_score[{class}]: {f:.4}"),
            None => println!("f_score[{class}]: undefined"),
        }
    }
    match report.masked_mse {
        Some(m) => println!("masked_mse: {m:.4}"),
        None => println!("masked_mse: undefined"),
    }
}
