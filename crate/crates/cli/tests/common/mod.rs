//! Shared synthetic-recording fixtures for the command and acceptance
//! tests.

#![allow(dead_code)]

use sav_cli::config::{PipelineConfig, RecordingInput};
use sav_cli::io::frames::write_frame_dir;
use sav_cli::io::labels::write_label_csv;
use sav_core::ambisonics::encode_plane_wave;
use sav_core::geometry::Direction;
use sav_core::raster::RgbImage;
use std::path::Path;

pub const SOURCE_RATE: u32 = 24000;

/// Deterministic wideband test signal.
pub fn test_signal(n: usize, amplitude: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64;
            amplitude * (0.5 * (t * 0.131).sin() + 0.3 * (t * 0.037).cos() + 0.2 * (t * 0.311).sin())
        })
        .collect()
}

/// Equirectangular test pattern with the frame index encoded in the blue
/// channel.
pub fn equirect_pattern(width: usize, height: usize, frame: usize) -> RgbImage {
    let mut img = RgbImage::new(width, height);
    for y in 0..height {
        for x in 0..width {
            img.set_pixel(
                x,
                y,
                [
                    (x * 255 / width) as u8,
                    (y * 255 / height) as u8,
                    (frame * 9 % 256) as u8,
                ],
            );
        }
    }
    img
}

pub struct SyntheticRecording {
    pub input: RecordingInput,
    pub seconds: f64,
}

/// Writes a complete synthetic recording: a plane-wave source at a fixed
/// direction, test-pattern frames at 4 fps, and labels active over the
/// whole duration.
pub fn write_recording(
    dir: &Path,
    recording_id: &str,
    seconds: f64,
    source_az: f64,
    class_id: u32,
    amplitude: f64,
) -> SyntheticRecording {
    std::fs::create_dir_all(dir).unwrap();
    let n = (seconds * SOURCE_RATE as f64).round() as usize;
    let foa = encode_plane_wave(
        &test_signal(n, amplitude),
        Direction::new(source_az, 0.0),
        SOURCE_RATE,
    );
    let wav_path = dir.join("foa.wav");
    let spec = hound_spec();
    let mut writer = hound::WavWriter::create(&wav_path, spec).unwrap();
    for i in 0..foa.len() {
        for ch in foa.channels() {
            writer.write_sample(ch[i] as f32).unwrap();
        }
    }
    writer.finalize().unwrap();

    let frames_dir = dir.join("frames");
    let n_frames = (seconds * 4.0).round() as usize;
    let frames: Vec<RgbImage> = (0..n_frames).map(|i| equirect_pattern(64, 32, i)).collect();
    write_frame_dir(&frames_dir, &frames, 4.0).unwrap();

    let labels_path = dir.join("labels.csv");
    let n_label_frames = (seconds * 10.0).round() as u32;
    let rows: Vec<(u32, u32, u32, f64, f64)> = (0..n_label_frames)
        .map(|f| (f, class_id, 1, source_az, 0.0))
        .collect();
    write_label_csv(&labels_path, &rows).unwrap();

    SyntheticRecording {
        input: RecordingInput {
            recording_id: recording_id.to_string(),
            foa_wav: wav_path,
            frames_dir,
            labels_csv: labels_path,
        },
        seconds,
    }
}

fn hound_spec() -> hound::WavSpec {
    hound::WavSpec {
        channels: 4,
        sample_rate: SOURCE_RATE,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    }
}

/// A pipeline config over one synthetic recording.
pub fn config_for(recording: &SyntheticRecording, output_root: &Path) -> PipelineConfig {
    PipelineConfig {
        recordings: vec![recording.input.clone()],
        output_root: output_root.to_path_buf(),
        workers: 1,
        ..PipelineConfig::default()
    }
}

/// Yaws (multiples of 10) for which a source at `source_az` projects
/// onscreen under the default camera: relative azimuth in (-50, 50].
pub fn onscreen_yaws(source_az: f64) -> Vec<f64> {
    (0..36)
        .map(|i| i as f64 * 10.0)
        .filter(|yaw| {
            let rel = sav_core::geometry::normalize_azimuth(source_az - yaw);
            rel > -50.0 && rel <= 50.0
        })
        .collect()
}
