//! The dataset construction pipeline: window enumeration over a
//! recording, projection of sound-event labels into the virtual view,
//! the curation rules, clip rendering, and manifest statistics.

use crate::ambisonics::{foa_to_stereo, rotate_foa_yaw, FoaBuffer};
use crate::dsp::{apply_gain_db, highpass, is_clipping, resample, WaveBuffer};
use crate::error::{Error, Result};
use crate::geometry::{
    build_projection_map, pad_to_canvas, project_direction, project_equirect_to_perspective,
    CameraSpec, Direction, SamplingGrid, ViewAngle,
};
use crate::raster::RgbImage;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Clip length in seconds.
pub const CLIP_SECONDS: f64 = 5.0;
/// Rate of the position labels, frames per second.
pub const LABEL_FPS: usize = 10;
/// Label frames covered by one clip.
pub const CLIP_LABEL_FRAMES: usize = 50;
/// Output video rate, frames per second.
pub const CLIP_VIDEO_FPS: usize = 4;
/// Video frames rendered per clip.
pub const CLIP_VIDEO_FRAMES: usize = 20;
/// Output audio sample rate.
pub const OUTPUT_SAMPLE_RATE: u32 = 16000;

/// The two sound-event categories kept by curation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClass {
    Speech,
    Instrument,
}

/// One annotated sound event: a class, a source id, and sparse per-frame
/// directions (10 fps); a direction is present exactly where the event is
/// active.
#[derive(Debug, Clone)]
pub struct AnnotationEvent {
    pub class_id: u32,
    pub source_id: u32,
    pub positions: BTreeMap<u32, Direction>,
}

/// All annotated events of one recording.
#[derive(Debug, Clone)]
pub struct AnnotationTrack {
    pub recording_id: String,
    pub duration_s: f64,
    pub events: Vec<AnnotationEvent>,
}

impl AnnotationTrack {
    /// Groups raw label rows (frame index, class id, source id, azimuth,
    /// elevation) into events keyed by class and source.
    pub fn from_rows(
        recording_id: impl Into<String>,
        duration_s: f64,
        rows: &[(u32, u32, u32, f64, f64)],
    ) -> Self {
        let mut events: BTreeMap<(u32, u32), AnnotationEvent> = BTreeMap::new();
        for &(frame, class_id, source_id, az, el) in rows {
            events
                .entry((class_id, source_id))
                .or_insert_with(|| AnnotationEvent {
                    class_id,
                    source_id,
                    positions: BTreeMap::new(),
                })
                .positions
                .insert(frame, Direction::new(az, el));
        }
        AnnotationTrack {
            recording_id: recording_id.into(),
            duration_s,
            events: events.into_values().collect(),
        }
    }
}

/// One candidate clip: a start time and a viewing yaw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipWindow {
    pub start_s: f64,
    pub yaw_deg: f64,
}

/// Curation rules and window enumeration step sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurationConfig {
    /// Label class ids treated as speech.
    pub speech_classes: BTreeSet<u32>,
    /// Label class ids treated as instrument sounds.
    pub instrument_classes: BTreeSet<u32>,
    /// Minimum fraction of the clip with an active sound event.
    pub activity_threshold: f64,
    /// Keep clips with simultaneously active sources.
    pub allow_overlap: bool,
    /// Require every active target-class frame to project onscreen.
    pub require_onscreen: bool,
    /// Window start step in seconds.
    pub time_step_s: f64,
    /// Viewing-angle step in degrees.
    pub yaw_step_deg: f64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            speech_classes: [0, 1].into_iter().collect(),
            instrument_classes: [9].into_iter().collect(),
            activity_threshold: 0.8,
            allow_overlap: false,
            require_onscreen: true,
            time_step_s: 0.5,
            yaw_step_deg: 10.0,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.activity_threshold > 0.0 && self.activity_threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "activity threshold {} outside (0, 1]",
                self.activity_threshold
            )));
        }
        if self.time_step_s <= 0.0 || self.yaw_step_deg <= 0.0 {
            return Err(Error::invalid("window steps must be positive"));
        }
        if self
            .speech_classes
            .intersection(&self.instrument_classes)
            .next()
            .is_some()
        {
            return Err(Error::invalid(
                "a class id cannot be both speech and instrument",
            ));
        }
        Ok(())
    }

    /// Target category of a label class id, if it has one.
    pub fn target_class(&self, class_id: u32) -> Option<TargetClass> {
        if self.speech_classes.contains(&class_id) {
            Some(TargetClass::Speech)
        } else if self.instrument_classes.contains(&class_id) {
            Some(TargetClass::Instrument)
        } else {
            None
        }
    }
}

/// Why a window was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    OffTargetClass,
    Offscreen,
    Overlap,
    InsufficientActivity,
    Clipping,
}

/// Curation outcome of one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Keep,
    Reject(RejectReason),
}

/// One active label frame projected into the clip's view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedLabel {
    /// Label frame relative to the window start (0..50).
    pub frame: u32,
    pub class_id: u32,
    pub target: Option<TargetClass>,
    pub source_id: u32,
    pub onscreen: bool,
    /// Content-image pixel position when onscreen.
    pub x: Option<f64>,
    pub y: Option<f64>,
    /// Horizontal position normalized by the content width.
    pub norm_x: Option<f64>,
}

/// Record of one enumerated window: verdict, projected labels, and output
/// paths once rendered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub recording_id: String,
    pub start_s: f64,
    pub yaw_deg: f64,
    pub verdict: Verdict,
    pub dominant_class: Option<TargetClass>,
    pub labels: Vec<ProjectedLabel>,
    pub audio_path: Option<String>,
    pub frame_paths: Vec<String>,
}

/// Canonical clip id: recording, start in milliseconds, yaw in
/// centidegrees, both zero-padded so lexical order matches numeric order.
pub fn clip_id(recording_id: &str, window: &ClipWindow) -> String {
    format!(
        "{}_t{:06}_y{:05}",
        recording_id,
        (window.start_s * 1000.0).round() as u64,
        (window.yaw_deg * 100.0).round() as u64
    )
}

/// Enumerates the Cartesian product of start times (every `time_step_s`
/// while a full clip fits) and yaws (every `yaw_step_deg` in [0, 360)).
pub fn enumerate_windows(duration_s: f64, cfg: &CurationConfig) -> Vec<ClipWindow> {
    let mut windows = Vec::new();
    if duration_s < CLIP_SECONDS {
        return windows;
    }
    let n_starts = ((duration_s - CLIP_SECONDS) / cfg.time_step_s + 1e-9).floor() as usize + 1;
    let n_yaws = ((360.0 - 1e-9) / cfg.yaw_step_deg).floor() as usize + 1;
    for si in 0..n_starts {
        let start_s = si as f64 * cfg.time_step_s;
        for yi in 0..n_yaws {
            let yaw_deg = yi as f64 * cfg.yaw_step_deg;
            if yaw_deg >= 360.0 {
                break;
            }
            windows.push(ClipWindow { start_s, yaw_deg });
        }
    }
    windows
}

/// Projects every active label frame inside the window through the
/// window's view, keeping class, source, onscreen flag, and the
/// normalized horizontal position.
pub fn transform_labels(
    track: &AnnotationTrack,
    window: &ClipWindow,
    camera: &CameraSpec,
    cfg: &CurationConfig,
) -> Vec<ProjectedLabel> {
    let view = ViewAngle::new(window.yaw_deg);
    let base = (window.start_s * LABEL_FPS as f64).round() as u32;
    let mut labels = Vec::new();
    for event in &track.events {
        for (&abs_frame, &dir) in event
            .positions
            .range(base..base + CLIP_LABEL_FRAMES as u32)
        {
            let projected = project_direction(dir, camera, view);
            labels.push(ProjectedLabel {
                frame: abs_frame - base,
                class_id: event.class_id,
                target: cfg.target_class(event.class_id),
                source_id: event.source_id,
                onscreen: projected.is_some(),
                x: projected.map(|p| p.x),
                y: projected.map(|p| p.y),
                norm_x: projected.map(|p| p.x / camera.content_width as f64),
            });
        }
    }
    labels.sort_by_key(|l| (l.frame, l.class_id, l.source_id));
    labels
}

/// Applies the curation rules to one window's projected labels. Checks
/// run in a fixed order; the first failing rule names the verdict.
pub fn curate(labels: &[ProjectedLabel], cfg: &CurationConfig) -> Verdict {
    if labels.iter().any(|l| l.target.is_none()) {
        return Verdict::Reject(RejectReason::OffTargetClass);
    }
    if cfg.require_onscreen && labels.iter().any(|l| l.target.is_some() && !l.onscreen) {
        return Verdict::Reject(RejectReason::Offscreen);
    }
    if !cfg.allow_overlap {
        let mut sources_per_frame: BTreeMap<u32, BTreeSet<(u32, u32)>> = BTreeMap::new();
        for l in labels {
            sources_per_frame
                .entry(l.frame)
                .or_default()
                .insert((l.class_id, l.source_id));
        }
        if sources_per_frame.values().any(|s| s.len() >= 2) {
            return Verdict::Reject(RejectReason::Overlap);
        }
    }
    let active_frames: BTreeSet<u32> = labels.iter().map(|l| l.frame).collect();
    if (active_frames.len() as f64 / CLIP_LABEL_FRAMES as f64) < cfg.activity_threshold {
        return Verdict::Reject(RejectReason::InsufficientActivity);
    }
    Verdict::Keep
}

/// Audio-chain settings applied when rendering a clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DspConfig {
    /// Gain applied after filtering, in dB.
    pub gain_db: f64,
    /// Apply the fixed high-pass before the gain stage.
    pub highpass: bool,
}

impl Default for DspConfig {
    fn default() -> Self {
        DspConfig {
            gain_db: 38.0,
            highpass: true,
        }
    }
}

/// Time-indexed source of equirectangular frames. Implementations may
/// load lazily; frame times must be sorted ascending.
pub trait FrameSource {
    fn frame_times(&self) -> &[f64];
    fn frame(&self, index: usize) -> Result<Arc<RgbImage>>;
    /// Nominal source frame rate, used for the coverage tolerance.
    fn nominal_fps(&self) -> f64;
}

/// In-memory frame sequence.
pub struct MemoryFrames {
    times: Vec<f64>,
    images: Vec<Arc<RgbImage>>,
    fps: f64,
}

impl MemoryFrames {
    pub fn new(times: Vec<f64>, images: Vec<RgbImage>, fps: f64) -> Result<Self> {
        if times.len() != images.len() {
            return Err(Error::mismatch(format!(
                "{} frame times for {} images",
                times.len(),
                images.len()
            )));
        }
        if times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("frame times must be sorted"));
        }
        Ok(MemoryFrames {
            times,
            images: images.into_iter().map(Arc::new).collect(),
            fps,
        })
    }

    /// Uniformly timed frames starting at t = 0.
    pub fn uniform(images: Vec<RgbImage>, fps: f64) -> Result<Self> {
        let times = (0..images.len()).map(|i| i as f64 / fps).collect();
        MemoryFrames::new(times, images, fps)
    }
}

impl FrameSource for MemoryFrames {
    fn frame_times(&self) -> &[f64] {
        &self.times
    }

    fn frame(&self, index: usize) -> Result<Arc<RgbImage>> {
        Ok(self.images[index].clone())
    }

    fn nominal_fps(&self) -> f64 {
        self.fps
    }
}

/// Index of the frame nearest in time, preferring the earlier frame on
/// exact ties.
fn nearest_frame(times: &[f64], t: f64) -> usize {
    let i = times.partition_point(|&ft| ft < t);
    if i == 0 {
        return 0;
    }
    if i == times.len() {
        return times.len() - 1;
    }
    if (t - times[i - 1]) <= (times[i] - t) {
        i - 1
    } else {
        i
    }
}

/// A rendered clip: 5 s of 16 kHz stereo and 20 padded frames.
#[derive(Debug, Clone)]
pub struct RenderedClip {
    pub audio: WaveBuffer,
    pub frames: Vec<RgbImage>,
}

/// Rendering either yields a clip or hits the clipping gate.
#[derive(Debug, Clone)]
pub enum RenderOutcome {
    Clip(RenderedClip),
    Clipping,
}

/// Renders one window with a prebuilt remap grid. The audio chain is
/// slice, rotate by yaw, downmix, resample, high-pass, gain, clipping
/// gate; the video chain takes the source frame nearest to each target
/// timestamp, projects it, and pads it to the canvas.
pub fn render_clip_with_grid(
    foa: &FoaBuffer,
    frames: &dyn FrameSource,
    window: &ClipWindow,
    camera: &CameraSpec,
    grid: &SamplingGrid,
    dsp: &DspConfig,
) -> Result<RenderOutcome> {
    let sr = foa.sample_rate() as f64;
    let start_sample = (window.start_s * sr).round() as usize;
    let end_sample = start_sample + (CLIP_SECONDS * sr).round() as usize;
    if end_sample > foa.len() {
        return Err(Error::invalid(format!(
            "window at {:.2}s needs samples up to {} but the recording has {}",
            window.start_s,
            end_sample,
            foa.len()
        )));
    }
    let sliced = foa.slice(start_sample, end_sample)?;
    let rotated = rotate_foa_yaw(&sliced, window.yaw_deg);
    let stereo: WaveBuffer = foa_to_stereo(&rotated).into();
    let mut audio = resample(&stereo, OUTPUT_SAMPLE_RATE);
    if dsp.highpass {
        audio = highpass(&audio);
    }
    audio = apply_gain_db(&audio, dsp.gain_db);
    if is_clipping(&audio) {
        return Ok(RenderOutcome::Clipping);
    }

    let times = frames.frame_times();
    if times.is_empty() {
        return Err(Error::invalid("frame source is empty"));
    }
    let tolerance = 0.5 / frames.nominal_fps() + 1e-6;
    let mut rendered = Vec::with_capacity(CLIP_VIDEO_FRAMES);
    for k in 0..CLIP_VIDEO_FRAMES {
        let t = window.start_s + k as f64 / CLIP_VIDEO_FPS as f64;
        let idx = nearest_frame(times, t);
        if (times[idx] - t).abs() > tolerance {
            return Err(Error::invalid(format!(
                "no source frame within {:.3}s of t={:.3}s",
                tolerance, t
            )));
        }
        let source = frames.frame(idx)?;
        let content = project_equirect_to_perspective(&source, grid)?;
        rendered.push(pad_to_canvas(&content, camera)?);
    }
    Ok(RenderOutcome::Clip(RenderedClip {
        audio,
        frames: rendered,
    }))
}

/// [`render_clip_with_grid`] with the grid built on the fly from the
/// first source frame's size.
pub fn render_clip(
    foa: &FoaBuffer,
    frames: &dyn FrameSource,
    window: &ClipWindow,
    camera: &CameraSpec,
    dsp: &DspConfig,
) -> Result<RenderOutcome> {
    if frames.frame_times().is_empty() {
        return Err(Error::invalid("frame source is empty"));
    }
    let first = frames.frame(0)?;
    let grid = build_projection_map(
        camera,
        ViewAngle::new(window.yaw_deg),
        first.width(),
        first.height(),
    )?;
    render_clip_with_grid(foa, frames, window, camera, &grid, dsp)
}

/// Majority target class over the projected labels; ties go to speech.
pub fn dominant_class(labels: &[ProjectedLabel]) -> Option<TargetClass> {
    let speech = labels
        .iter()
        .filter(|l| l.target == Some(TargetClass::Speech))
        .count();
    let instrument = labels
        .iter()
        .filter(|l| l.target == Some(TargetClass::Instrument))
        .count();
    if speech == 0 && instrument == 0 {
        None
    } else if speech >= instrument {
        Some(TargetClass::Speech)
    } else {
        Some(TargetClass::Instrument)
    }
}

/// Transforms, curates, and (for kept windows) renders one window,
/// producing the manifest record and, when kept, the media to write.
/// Clipping discovered during rendering downgrades the verdict.
pub fn process_window(
    foa: &FoaBuffer,
    frames: &dyn FrameSource,
    track: &AnnotationTrack,
    window: &ClipWindow,
    camera: &CameraSpec,
    grid: &SamplingGrid,
    curation: &CurationConfig,
    dsp: &DspConfig,
) -> Result<(ClipRecord, Option<RenderedClip>)> {
    let labels = transform_labels(track, window, camera, curation);
    let mut verdict = curate(&labels, curation);
    let mut media = None;
    if verdict == Verdict::Keep {
        match render_clip_with_grid(foa, frames, window, camera, grid, dsp)? {
            RenderOutcome::Clip(clip) => media = Some(clip),
            RenderOutcome::Clipping => verdict = Verdict::Reject(RejectReason::Clipping),
        }
    }
    let record = ClipRecord {
        clip_id: clip_id(&track.recording_id, window),
        recording_id: track.recording_id.clone(),
        start_s: window.start_s,
        yaw_deg: window.yaw_deg,
        verdict,
        dominant_class: dominant_class(&labels),
        labels,
        audio_path: None,
        frame_paths: Vec::new(),
    };
    Ok((record, media))
}

/// Aggregate counts over a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStats {
    pub total: usize,
    pub kept: usize,
    pub rejected: BTreeMap<RejectReason, usize>,
    pub kept_hours: f64,
    pub speech_clips: usize,
    pub instrument_clips: usize,
    /// Kept speech clips per kept instrument clip; `None` when there are
    /// no instrument clips to form a ratio.
    pub speech_instrument_ratio: Option<f64>,
}

/// Counts per verdict and reason, kept-clip hours, and the class ratio
/// over kept clips.
pub fn manifest_stats(records: &[ClipRecord]) -> ManifestStats {
    let mut kept = 0;
    let mut rejected: BTreeMap<RejectReason, usize> = BTreeMap::new();
    let mut speech_clips = 0;
    let mut instrument_clips = 0;
    for r in records {
        match r.verdict {
            Verdict::Keep => {
                kept += 1;
                match r.dominant_class {
                    Some(TargetClass::Speech) => speech_clips += 1,
                    Some(TargetClass::Instrument) => instrument_clips += 1,
                    None => {}
                }
            }
            Verdict::Reject(reason) => *rejected.entry(reason).or_default() += 1,
        }
    }
    ManifestStats {
        total: records.len(),
        kept,
        rejected,
        kept_hours: kept as f64 * CLIP_SECONDS / 3600.0,
        speech_clips,
        instrument_clips,
        speech_instrument_ratio: (instrument_clips > 0)
            .then(|| speech_clips as f64 / instrument_clips as f64),
    }
}

impl std::fmt::Display for ManifestStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "total_windows: {}", self.total)?;
        writeln!(f, "kept: {}", self.kept)?;
        for (reason, count) in &self.rejected {
            let name = match reason {
                RejectReason::OffTargetClass => "off_target_class",
                RejectReason::Offscreen => "offscreen",
                RejectReason::Overlap => "overlap",
                RejectReason::InsufficientActivity => "insufficient_activity",
                RejectReason::Clipping => "clipping",
            };
            writeln!(f, "rejected_{}: {}", name, count)?;
        }
        writeln!(f, "kept_hours: {:.4}", self.kept_hours)?;
        writeln!(f, "speech_clips: {}", self.speech_clips)?;
        writeln!(f, "instrument_clips: {}", self.instrument_clips)?;
        match self.speech_instrument_ratio {
            Some(r) => writeln!(f, "speech_instrument_ratio: {:.4}", r),
            None => writeln!(f, "speech_instrument_ratio: undefined"),
        }
    }
}
