//! Interactive browser demo built on the core library. Three explorable
//! operations, each driven by sliders on a static page:
//!
//! - a procedural equirectangular panorama projected through the virtual
//!   camera at an adjustable yaw, with a sound source marked in both
//!   views;
//! - the stereo downmix balance of a plane-wave source as the view
//!   rotates;
//! - the alignment metric on a synthetic scene with an adjustable margin.
//!
//! Every export is a pure function over its arguments, so the same code
//! runs in unit tests on the host target.

use sav_core::ambisonics::{encode_plane_wave, foa_to_stereo, rotate_foa_yaw};
use sav_core::geometry::{
    build_projection_map, canvas_top_offset, pad_to_canvas, project_direction,
    project_equirect_to_perspective, CameraSpec, Direction, ViewAngle,
};
use sav_core::metrics::{spatial_av_align, AlignConfig, BoundingBox, DetectionTrack, SeldTrack};
use sav_core::raster::RgbImage;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

pub const PANO_WIDTH: usize = 512;
pub const PANO_HEIGHT: usize = 256;
pub const CANVAS: usize = 256;

fn lerp(a: [u8; 3], b: [u8; 3], t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    [
        (a[0] as f64 + (b[0] as f64 - a[0] as f64) * t) as u8,
        (a[1] as f64 + (b[1] as f64 - a[1] as f64) * t) as u8,
        (a[2] as f64 + (b[2] as f64 - a[2] as f64) * t) as u8,
    ]
}

/// Procedural panorama: sky above the horizon, floor below, angle grid
/// every 30 degrees, and a red stripe marking azimuth 0.
fn panorama() -> RgbImage {
    let (w, h) = (PANO_WIDTH, PANO_HEIGHT);
    let mut img = RgbImage::new(w, h);
    for y in 0..h {
        let el = (0.5 - (y as f64 + 0.5) / h as f64) * 180.0;
        for x in 0..w {
            let az = (0.5 - (x as f64 + 0.5) / w as f64) * 360.0;
            let mut rgb = if el >= 0.0 {
                lerp([120, 170, 230], [225, 238, 250], el / 90.0)
            } else {
                lerp([150, 120, 90], [60, 45, 35], -el / 90.0)
            };
            let az_grid = (az.rem_euclid(30.0)).min(30.0 - az.rem_euclid(30.0));
            let el_grid = (el.rem_euclid(30.0)).min(30.0 - el.rem_euclid(30.0));
            if az_grid < 0.4 || el_grid < 0.3 {
                rgb = [40, 40, 48];
            }
            if az.abs() < 1.0 {
                rgb = [200, 60, 50];
            }
            img.set_pixel(x, y, rgb);
        }
    }
    img
}

fn pano_column(az_deg: f64) -> usize {
    let u = (0.5 - az_deg / 360.0) * PANO_WIDTH as f64;
    (u.rem_euclid(PANO_WIDTH as f64) as usize).min(PANO_WIDTH - 1)
}

fn pano_row(el_deg: f64) -> usize {
    let v = (0.5 - el_deg / 180.0) * PANO_HEIGHT as f64;
    (v.max(0.0) as usize).min(PANO_HEIGHT - 1)
}

fn draw_disc(img: &mut RgbImage, cx: i64, cy: i64, radius: i64, rgb: [u8; 3]) {
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            if dx * dx + dy * dy > radius * radius {
                continue;
            }
            let x = (cx + dx).rem_euclid(img.width() as i64) as usize;
            let y = cy + dy;
            if (0..img.height() as i64).contains(&y) {
                img.set_pixel(x, y as usize, rgb);
            }
        }
    }
}

fn rgba_bytes(img: &RgbImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.width() * img.height() * 4);
    for chunk in img.data().chunks_exact(3) {
        out.extend_from_slice(chunk);
        out.push(255);
    }
    out
}

/// The panorama with the sound source marked and the current view's
/// horizontal extent drawn as dark columns. RGBA, 512x256.
#[wasm_bindgen]
pub fn render_panorama(yaw_deg: f64, source_az_deg: f64, source_el_deg: f64) -> Vec<u8> {
    let mut img = panorama();
    let camera = CameraSpec::default();
    for edge in [-camera.hfov_deg / 2.0, camera.hfov_deg / 2.0] {
        let x = pano_column(yaw_deg + edge);
        for y in 0..img.height() {
            if y % 4 < 2 {
                img.set_pixel(x, y, [255, 255, 255]);
            }
        }
    }
    let cx = pano_column(source_az_deg) as i64;
    let cy = pano_row(source_el_deg) as i64;
    draw_disc(&mut img, cx, cy, 5, [255, 210, 0]);
    rgba_bytes(&img)
}

/// The padded perspective view of the panorama at the given yaw, with
/// the source crosshair drawn when it lands onscreen. RGBA, 256x256.
#[wasm_bindgen]
pub fn render_view(yaw_deg: f64, source_az_deg: f64, source_el_deg: f64) -> Vec<u8> {
    let camera = CameraSpec::default();
    let view = ViewAngle::new(yaw_deg);
    let pano = panorama();
    let grid = build_projection_map(&camera, view, pano.width(), pano.height())
        .expect("default camera is valid");
    let content = project_equirect_to_perspective(&pano, &grid).expect("dims match");
    let mut padded = pad_to_canvas(&content, &camera).expect("content fits canvas");
    let source = Direction::new(source_az_deg, source_el_deg);
    if let Some(p) = project_direction(source, &camera, view) {
        let top = canvas_top_offset(&camera) as i64;
        draw_disc(&mut padded, p.x as i64, p.y as i64 + top, 4, [255, 210, 0]);
    }
    rgba_bytes(&padded)
}

/// True when the source is onscreen for the given yaw; lets the page
/// annotate the view.
#[wasm_bindgen]
pub fn source_onscreen(yaw_deg: f64, source_az_deg: f64, source_el_deg: f64) -> bool {
    project_direction(
        Direction::new(source_az_deg, source_el_deg),
        &CameraSpec::default(),
        ViewAngle::new(yaw_deg),
    )
    .is_some()
}

fn demo_signal() -> Vec<f64> {
    (0..256)
        .map(|i| (i as f64 * 0.19).sin() * 0.5 + (i as f64 * 0.047).cos() * 0.3)
        .collect()
}

fn rms(samples: &[f64]) -> f64 {
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Left/right RMS of the rotate-then-downmix chain for a plane wave at
/// `source_az_deg`, swept over view yaws 0..=360 in 1-degree steps.
/// Interleaved `[l0, r0, l1, r1, ...]`, 722 values.
#[wasm_bindgen]
pub fn stereo_balance(source_az_deg: f64) -> Vec<f64> {
    let signal = demo_signal();
    let foa = encode_plane_wave(&signal, Direction::new(source_az_deg, 0.0), 16000);
    let mut out = Vec::with_capacity(2 * 361);
    for yaw in 0..=360 {
        let st = foa_to_stereo(&rotate_foa_yaw(&foa, yaw as f64));
        out.push(rms(&st.left));
        out.push(rms(&st.right));
    }
    out
}

#[derive(Serialize)]
struct DemoBox {
    frame: usize,
    x1: f64,
    x2: f64,
}

#[derive(Serialize)]
struct DemoEvent {
    frame: usize,
    x: f64,
    hit: bool,
}

#[derive(Serialize)]
struct AlignDemo {
    score: Option<f64>,
    true_positives: u64,
    false_negatives: u64,
    margin: f64,
    video_frames: usize,
    audio_frames: usize,
    boxes: Vec<DemoBox>,
    events: Vec<DemoEvent>,
}

fn lcg(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*state >> 11) as f64) / ((1u64 << 53) as f64)
}

/// Runs the alignment metric on a deterministic synthetic scene and
/// returns the geometry plus per-event outcomes as JSON, for drawing.
#[wasm_bindgen]
pub fn align_playground(margin: f64, seed: u32) -> String {
    let (video_frames, audio_frames) = (8, 20);
    let mut state = seed as u64 * 2 + 1;
    let mut det = DetectionTrack::new(video_frames, 256.0, 256.0);
    let mut boxes = Vec::new();
    for frame in 0..video_frames {
        for _ in 0..1 + (lcg(&mut state) * 2.0) as usize {
            let x1 = lcg(&mut state) * 210.0;
            let x2 = x1 + 10.0 + lcg(&mut state) * 36.0;
            det.push_box(
                frame,
                BoundingBox {
                    class: "person".into(),
                    x1,
                    y1: 40.0,
                    x2,
                    y2: 220.0,
                    score: 1.0,
                },
            )
            .expect("demo boxes stay on canvas");
            boxes.push(DemoBox { frame, x1, x2 });
        }
    }
    let mut seld = SeldTrack::new(audio_frames);
    let mut xs = Vec::new();
    for frame in 0..audio_frames {
        let x = 0.5 + 0.45 * (frame as f64 * 0.5 + lcg(&mut state)).sin();
        seld.set("speech", frame, 1.0, Some(x))
            .expect("demo events are in range");
        xs.push((frame, x));
    }
    let cfg = AlignConfig {
        margin: margin.clamp(0.0, 0.5),
        ..AlignConfig::default()
    };
    let result = spatial_av_align(&det, &seld, &cfg);

    // Re-evaluate each event alone to tag it as hit or miss for the page.
    let events = xs
        .into_iter()
        .map(|(frame, x)| {
            let mut single = SeldTrack::new(audio_frames);
            single.set("speech", frame, 1.0, Some(x)).unwrap();
            let r = spatial_av_align(&det, &single, &cfg);
            DemoEvent {
                frame,
                x,
                hit: r.true_positives == 1,
            }
        })
        .collect();

    serde_json::to_string(&AlignDemo {
        score: result.score(),
        true_positives: result.true_positives,
        false_negatives: result.false_negatives,
        margin: cfg.margin,
        video_frames,
        audio_frames,
        boxes,
        events,
    })
    .expect("demo payload serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendered_buffers_have_canvas_shape() {
        let pano = render_panorama(40.0, 10.0, 0.0);
        assert_eq!(pano.len(), PANO_WIDTH * PANO_HEIGHT * 4);
        let view = render_view(40.0, 10.0, 0.0);
        assert_eq!(view.len(), CANVAS * CANVAS * 4);
        assert!(view.iter().skip(3).step_by(4).all(|&a| a == 255));
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(render_view(123.0, -45.0, 10.0), render_view(123.0, -45.0, 10.0));
    }

    #[test]
    fn padding_rows_stay_black() {
        let view = render_view(0.0, 0.0, 0.0);
        // Row 10 lies inside the top padding.
        let row = &view[10 * CANVAS * 4..10 * CANVAS * 4 + CANVAS * 4];
        assert!(row.chunks_exact(4).all(|p| p[0] == 0 && p[1] == 0 && p[2] == 0));
    }

    #[test]
    fn onscreen_matches_the_half_fov() {
        assert!(source_onscreen(30.0, 30.0, 0.0));
        assert!(source_onscreen(30.0, 75.0, 0.0));
        assert!(!source_onscreen(30.0, -20.001, 0.0));
        assert!(!source_onscreen(30.0, -150.0, 0.0));
    }

    #[test]
    fn balance_curve_crosses_at_the_source_azimuth() {
        let curve = stereo_balance(90.0);
        assert_eq!(curve.len(), 722);
        let (l, r) = (curve[2 * 90], curve[2 * 90 + 1]);
        assert!((l - r).abs() < 1e-9, "{l} vs {r}");
        // Slightly past the source the balance tips right-of-center.
        let (l2, r2) = (curve[2 * 120], curve[2 * 120 + 1]);
        assert!(r2 > l2);
    }

    #[test]
    fn align_playground_reports_consistent_tallies() {
        let parsed: serde_json::Value =
            serde_json::from_str(&align_playground(0.1, 7)).unwrap();
        let tp = parsed["true_positives"].as_u64().unwrap();
        let fn_ = parsed["false_negatives"].as_u64().unwrap();
        assert_eq!(tp + fn_, 20);
        let hits = parsed["events"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e["hit"].as_bool().unwrap())
            .count() as u64;
        assert_eq!(hits, tp);
        let wide: serde_json::Value =
            serde_json::from_str(&align_playground(0.5, 7)).unwrap();
        assert!(wide["true_positives"].as_u64().unwrap() >= tp);
    }
}
