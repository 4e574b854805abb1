//! Evaluation statistics: Fréchet distance over embedding sets, the
//! Spatial AV-Align recall between sound-event tracks and object
//! detections, and frame-level scores for the localization model.
//!
//! All inputs here are ingested detections/embeddings; no model runs
//! inside this crate.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Audio-frame rate of localization tracks (frames per second).
pub const SELD_FPS: usize = 10;
/// Video-frame rate of detection tracks (frames per second).
pub const DETECTION_FPS: usize = 4;

/// Which side of a comparison an embedding set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceTag {
    Reference,
    Candidate,
}

/// N samples of D-dimensional embeddings, row-major.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    n: usize,
    d: usize,
    data: Vec<f64>,
    pub tag: SourceTag,
}

impl EmbeddingSet {
    pub fn new(n: usize, d: usize, data: Vec<f64>, tag: SourceTag) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::mismatch(format!(
                "{} values for an {}x{} embedding matrix",
                data.len(),
                n,
                d
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding matrix contains non-finite values"));
        }
        Ok(EmbeddingSet { n, d, data, tag })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

/// Sufficient statistics for the Fréchet distance.
#[derive(Debug, Clone)]
pub struct GaussianStats {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianStats {
    /// Builds stats from a mean and covariance; the covariance is
    /// symmetrized as `(C + C')/2`.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::mismatch(format!(
                "covariance is {}x{} for a length-{} mean",
                covariance.nrows(),
                covariance.ncols(),
                d
            )));
        }
        let covariance = (&covariance + covariance.transpose()) * 0.5;
        Ok(GaussianStats { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// Sample mean and unbiased (N-1) sample covariance of an embedding set.
pub fn fit_gaussian(set: &EmbeddingSet) -> Result<GaussianStats> {
    let (n, d) = (set.len(), set.dim());
    if n < 2 {
        return Err(Error::invalid(format!(
            "covariance needs at least 2 samples, got {n}"
        )));
    }
    let mut mean = DVector::zeros(d);
    for i in 0..n {
        for (j, v) in set.row(i).iter().enumerate() {
            mean[j] += v;
        }
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..n {
        let row = set.row(i);
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[(a, b)] = cov[(b, a)];
        }
    }
    cov /= (n - 1) as f64;
    GaussianStats::new(mean, cov)
}

/// Eigenvalue floor: anything below this is treated as zero when taking
/// matrix square roots of near-singular covariances.
const EIGEN_CLAMP: f64 = 1e-10;

fn symmetric_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let root = if lambda < EIGEN_CLAMP { 0.0 } else { lambda.sqrt() };
        scaled.column_mut(j).scale_mut(root);
    }
    &scaled * eig.eigenvectors.transpose()
}

/// Fréchet distance between two Gaussians:
/// `|mu_a - mu_b|^2 + Tr(Ca + Cb - 2 (Ca^1/2 Cb Ca^1/2)^1/2)`,
/// computed with symmetric eigendecompositions. Near-zero negative
/// eigenvalues are clamped and the result is floored at zero.
pub fn frechet_distance(a: &GaussianStats, b: &GaussianStats) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::mismatch(format!(
            "embedding dims differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = a.mean() - b.mean();
    let mean_term = diff.dot(&diff);
    let a_half = symmetric_sqrt(a.covariance());
    let inner = &a_half * b.covariance() * &a_half;
    let inner_sym = (&inner + inner.transpose()) * 0.5;
    let eig = inner_sym.symmetric_eigen();
    let trace_sqrt: f64 = eig
        .eigenvalues
        .iter()
        .map(|&l| if l < EIGEN_CLAMP { 0.0 } else { l.sqrt() })
        .sum();
    let value =
        mean_term + a.covariance().trace() + b.covariance().trace() - 2.0 * trace_sqrt;
    Ok(value.max(0.0))
}

/// One object detection in padded-canvas pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub class: String,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub score: f64,
}

/// Per-video-frame object detections for one clip (4 fps).
#[derive(Debug, Clone)]
pub struct DetectionTrack {
    canvas_width: f64,
    canvas_height: f64,
    frames: Vec<Vec<BoundingBox>>,
}

impl DetectionTrack {
    pub fn new(n_frames: usize, canvas_width: f64, canvas_height: f64) -> Self {
        DetectionTrack {
            canvas_width,
            canvas_height,
            frames: vec![Vec::new(); n_frames],
        }
    }

    pub fn push_box(&mut self, frame: usize, bbox: BoundingBox) -> Result<()> {
        if frame >= self.frames.len() {
            return Err(Error::invalid(format!(
                "frame {frame} out of range ({} video frames)",
                self.frames.len()
            )));
        }
        if !(bbox.x1 < bbox.x2 && bbox.y1 < bbox.y2) {
            return Err(Error::invalid(format!(
                "degenerate box [{}, {}] x [{}, {}]",
                bbox.x1, bbox.x2, bbox.y1, bbox.y2
            )));
        }
        if bbox.x1 < 0.0
            || bbox.y1 < 0.0
            || bbox.x2 > self.canvas_width
            || bbox.y2 > self.canvas_height
        {
            return Err(Error::invalid("box outside the canvas".to_string()));
        }
        self.frames[frame].push(bbox);
        Ok(())
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn canvas_width(&self) -> f64 {
        self.canvas_width
    }

    pub fn boxes(&self, frame: usize) -> &[BoundingBox] {
        &self.frames[frame]
    }
}

/// One audio frame of one class: estimated activity and, when reported,
/// the normalized horizontal position (0 = left end, 1 = right end of the
/// image).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeldFrame {
    pub activity: f64,
    pub x: Option<f64>,
}

/// Per-audio-frame, per-class localization output for one clip (10 fps).
#[derive(Debug, Clone)]
pub struct SeldTrack {
    n_frames: usize,
    classes: BTreeMap<String, Vec<SeldFrame>>,
}

impl SeldTrack {
    pub fn new(n_frames: usize) -> Self {
        SeldTrack {
            n_frames,
            classes: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, class: &str, frame: usize, activity: f64, x: Option<f64>) -> Result<()> {
        if frame >= self.n_frames {
            return Err(Error::invalid(format!(
                "frame {frame} out of range ({} audio frames)",
                self.n_frames
            )));
        }
        if !(0.0..=1.0).contains(&activity) {
            return Err(Error::invalid(format!("activity {activity} outside [0, 1]")));
        }
        if let Some(x) = x {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::invalid(format!("position {x} outside [0, 1]")));
            }
        }
        let frames = self
            .classes
            .entry(class.to_string())
            .or_insert_with(|| vec![SeldFrame { activity: 0.0, x: None }; self.n_frames]);
        frames[frame] = SeldFrame { activity, x };
        Ok(())
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn classes(&self) -> impl Iterator<Item = (&str, &[SeldFrame])> {
        self.classes.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn class(&self, name: &str) -> Option<&[SeldFrame]> {
        self.classes.get(name).map(|v| v.as_slice())
    }
}

/// Reference activity/position track: `Some(x)` marks an active frame at
/// normalized position `x`.
#[derive(Debug, Clone)]
pub struct LabelTrack {
    n_frames: usize,
    classes: BTreeMap<String, Vec<Option<f64>>>,
}

impl LabelTrack {
    pub fn new(n_frames: usize) -> Self {
        LabelTrack {
            n_frames,
            classes: BTreeMap::new(),
        }
    }

    pub fn set_active(&mut self, class: &str, frame: usize, x: f64) -> Result<()> {
        if frame >= self.n_frames {
            return Err(Error::invalid(format!(
                "frame {frame} out of range ({} label frames)",
                self.n_frames
            )));
        }
        self.classes
            .entry(class.to_string())
            .or_insert_with(|| vec![None; self.n_frames])[frame] = Some(x);
        Ok(())
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn classes(&self) -> impl Iterator<Item = (&str, &[Option<f64>])> {
        self.classes.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Parameters of the Spatial AV-Align metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignConfig {
    /// Half-width of the interval around the estimated horizontal
    /// position, as a fraction of the canvas width.
    pub margin: f64,
    /// Minimum activity for a sound event to count as detected.
    pub activity_threshold: f64,
    /// Video frames searched on each side of the nearest frame.
    pub adjacency: usize,
    /// Sound-event classes that participate in the score.
    pub audio_classes: BTreeSet<String>,
    /// Object classes that can confirm a sound event.
    pub object_classes: BTreeSet<String>,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            margin: 0.10,
            activity_threshold: 0.5,
            adjacency: 1,
            audio_classes: ["speech", "instrument"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            object_classes: ["person"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.margin) {
            return Err(Error::invalid(format!("margin {} outside [0, 0.5]", self.margin)));
        }
        Ok(())
    }
}

/// True-positive / false-negative tally; the score is undefined until at
/// least one sound event was counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AlignResult {
    pub true_positives: u64,
    pub false_negatives: u64,
}

impl AlignResult {
    /// `TP / (TP + FN)`, or `None` when nothing was counted.
    pub fn score(&self) -> Option<f64> {
        let total = self.true_positives + self.false_negatives;
        (total > 0).then(|| self.true_positives as f64 / total as f64)
    }
}

/// Nearest video frame for an audio frame, rounding half up.
fn nearest_video_frame(audio_frame: usize) -> usize {
    (audio_frame * DETECTION_FPS * 2 + SELD_FPS) / (2 * SELD_FPS)
}

/// Counts, per active sound event frame, whether any object of an
/// accepted class in the temporally adjacent video frames horizontally
/// overlaps the margin interval around the estimated position. Detected
/// objects without an audio counterpart are never penalized.
pub fn spatial_av_align(
    det: &DetectionTrack,
    seld: &SeldTrack,
    cfg: &AlignConfig,
) -> AlignResult {
    let mut result = AlignResult::default();
    for (class, frames) in seld.classes() {
        if !cfg.audio_classes.contains(class) {
            continue;
        }
        for (k, frame) in frames.iter().enumerate() {
            if frame.activity < cfg.activity_threshold {
                continue;
            }
            // An active event with no reported position cannot be
            // confirmed by any box.
            let Some(x) = frame.x else {
                result.false_negatives += 1;
                continue;
            };
            if det.n_frames() == 0 {
                result.false_negatives += 1;
                continue;
            }
            let lo = (x - cfg.margin).clamp(0.0, 1.0) * det.canvas_width();
            let hi = (x + cfg.margin).clamp(0.0, 1.0) * det.canvas_width();
            let j = nearest_video_frame(k).min(det.n_frames() - 1);
            let j_lo = j.saturating_sub(cfg.adjacency);
            let j_hi = (j + cfg.adjacency).min(det.n_frames() - 1);
            let hit = (j_lo..=j_hi).any(|v| {
                det.boxes(v).iter().any(|b| {
                    cfg.object_classes.contains(&b.class) && b.x1 <= hi && b.x2 >= lo
                })
            });
            if hit {
                result.true_positives += 1;
            } else {
                result.false_negatives += 1;
            }
        }
    }
    result
}

/// Sums per-clip tallies into a corpus-level result.
pub fn pool_align(results: &[AlignResult]) -> AlignResult {
    let mut pooled = AlignResult::default();
    for r in results {
        pooled.true_positives += r.true_positives;
        pooled.false_negatives += r.false_negatives;
    }
    pooled
}

/// Per-class frame-level F-score of thresholded activities against
/// reference activity. `None` marks a class with no positives on either
/// side.
pub fn seld_fscore(
    pred: &SeldTrack,
    labels: &LabelTrack,
    threshold: f64,
) -> Result<BTreeMap<String, Option<f64>>> {
    if pred.n_frames() != labels.n_frames() {
        return Err(Error::mismatch(format!(
            "prediction has {} frames, labels have {}",
            pred.n_frames(),
            labels.n_frames()
        )));
    }
    let mut class_names: BTreeSet<String> = labels.classes.keys().cloned().collect();
    class_names.extend(pred.classes.keys().cloned());

    let inactive = vec![SeldFrame { activity: 0.0, x: None }; pred.n_frames()];
    let unlabeled = vec![None; labels.n_frames()];
    let mut scores = BTreeMap::new();
    for class in class_names {
        let p = pred.classes.get(&class).unwrap_or(&inactive);
        let l = labels.classes.get(&class).unwrap_or(&unlabeled);
        let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
        for k in 0..pred.n_frames() {
            let predicted = p[k].activity >= threshold;
            let actual = l[k].is_some();
            match (predicted, actual) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let denom = 2 * tp + fp + fn_;
        let f = (denom > 0).then(|| 2.0 * tp as f64 / denom as f64);
        scores.insert(class, f);
    }
    Ok(scores)
}

/// Mean squared error of predicted positions over label-active
/// (frame, class) pairs only; inactive frames never contribute. `None`
/// when the labels contain no active frame. A label-active frame without
/// a reported prediction scores as position 0.
pub fn seld_masked_mse(pred: &SeldTrack, labels: &LabelTrack) -> Result<Option<f64>> {
    if pred.n_frames() != labels.n_frames() {
        return Err(Error::mismatch(format!(
            "prediction has {} frames, labels have {}",
            pred.n_frames(),
            labels.n_frames()
        )));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (class, frames) in labels.classes() {
        let p = pred.classes.get(class);
        for (k, label) in frames.iter().enumerate() {
            let Some(label_x) = label else { continue };
            let pred_x = p.and_then(|v| v[k].x).unwrap_or(0.0);
            sum += (pred_x - label_x) * (pred_x - label_x);
            count += 1;
        }
    }
    Ok((count > 0).then(|| sum / count as f64))
}
