//! Equirectangular/perspective projection math and sound-event label
//! projection.
//!
//! Conventions used throughout:
//! - Azimuth is positive counterclockwise (toward the left edge of the
//!   image), normalized to [-180, 180). Elevation is positive upward,
//!   in [-90, 90]. This matches the label convention of the source
//!   recordings, so annotations are consumed unmodified.
//! - Image coordinates are continuous: pixel `i` spans `[i, i+1)` with
//!   its center at `i + 0.5`. The principal point sits at the image
//!   center `(W/2, H/2)`, and the onscreen test is half-open,
//!   `[0, W) x [0, H)`.
//! - In an equirectangular image, column maps to azimuth and row to
//!   elevation; azimuth wraps horizontally, elevation clamps.

use crate::error::{Error, Result};
use crate::raster::RgbImage;
use serde::{Deserialize, Serialize};

/// Normalizes an azimuth in degrees into [-180, 180).
pub fn normalize_azimuth(deg: f64) -> f64 {
    (deg + 180.0).rem_euclid(360.0) - 180.0
}

/// A direction on the sphere around the recording position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl Direction {
    /// Builds a direction, normalizing azimuth into [-180, 180) and
    /// clamping elevation into [-90, 90] (elevation never wraps).
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Direction {
            azimuth_deg: normalize_azimuth(azimuth_deg),
            elevation_deg: elevation_deg.clamp(-90.0, 90.0),
        }
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }
}

/// Viewing angle of the virtual perspective camera. The vertical viewing
/// angle is fixed at zero; only yaw varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewAngle {
    yaw_deg: f64,
}

impl ViewAngle {
    pub fn new(yaw_deg: f64) -> Self {
        ViewAngle { yaw_deg }
    }

    pub fn yaw_deg(&self) -> f64 {
        self.yaw_deg
    }

    /// Always zero.
    pub fn pitch_deg(&self) -> f64 {
        0.0
    }
}

/// Perspective camera intrinsics plus the padded output canvas size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub hfov_deg: f64,
    pub content_width: usize,
    pub content_height: usize,
    pub canvas_width: usize,
    pub canvas_height: usize,
}

impl Default for CameraSpec {
    fn default() -> Self {
        CameraSpec {
            hfov_deg: 100.0,
            content_width: 256,
            content_height: 144,
            canvas_width: 256,
            canvas_height: 256,
        }
    }
}

impl CameraSpec {
    pub fn validate(&self) -> Result<()> {
        if self.content_width == 0 || self.content_height == 0 {
            return Err(Error::invalid("camera content size must be positive"));
        }
        if !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return Err(Error::invalid(format!(
                "horizontal field of view {} must lie in (0, 180)",
                self.hfov_deg
            )));
        }
        if self.canvas_width < self.content_width || self.canvas_height < self.content_height {
            return Err(Error::invalid("canvas smaller than content image"));
        }
        Ok(())
    }

    /// Focal length in pixels, `(W/2) / tan(hfov/2)`.
    pub fn focal_px(&self) -> f64 {
        (self.content_width as f64 / 2.0) / (self.hfov_deg.to_radians() / 2.0).tan()
    }

    /// Vertical field of view implied by the horizontal one and the
    /// content aspect ratio.
    pub fn vfov_deg(&self) -> f64 {
        let half_h = (self.hfov_deg.to_radians() / 2.0).tan();
        let aspect = self.content_height as f64 / self.content_width as f64;
        2.0 * (half_h * aspect).atan().to_degrees()
    }
}

/// Continuous position in content-image coordinates: x grows rightward
/// from the left edge, y grows downward from the top edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPos {
    pub x: f64,
    pub y: f64,
}

/// Projects a direction into the content image for the given view.
///
/// Directions behind the camera (relative azimuth of 90 degrees or more,
/// or a non-positive forward component) and directions landing outside
/// the half-open content rectangle return `None`; offscreen is a result,
/// not an error.
pub fn project_direction(dir: Direction, camera: &CameraSpec, view: ViewAngle) -> Option<PixelPos> {
    let rel_az = normalize_azimuth(dir.azimuth_deg() - view.yaw_deg());
    if rel_az.abs() >= 90.0 {
        return None;
    }
    let rel = rel_az.to_radians();
    let el = dir.elevation_deg().to_radians();
    let forward = el.cos() * rel.cos();
    if forward <= 0.0 {
        return None;
    }
    let f = camera.focal_px();
    let x = camera.content_width as f64 / 2.0 - f * rel.tan();
    let y = camera.content_height as f64 / 2.0 - f * el.tan() / rel.cos();
    let onscreen = x >= 0.0
        && x < camera.content_width as f64
        && y >= 0.0
        && y < camera.content_height as f64;
    onscreen.then_some(PixelPos { x, y })
}

/// Inverse pinhole: the direction of the ray through a continuous
/// content-image coordinate.
pub fn pixel_to_direction(x: f64, y: f64, camera: &CameraSpec, view: ViewAngle) -> Direction {
    let f = camera.focal_px();
    let left = (camera.content_width as f64 / 2.0 - x) / f;
    let up = (camera.content_height as f64 / 2.0 - y) / f;
    let rel_az = left.atan2(1.0);
    let el = up.atan2((1.0 + left * left).sqrt());
    Direction::new(rel_az.to_degrees() + view.yaw_deg(), el.to_degrees())
}

/// Fractional equirectangular pixel position of a direction, in index
/// space where integer coordinates fall on pixel centers. The horizontal
/// coordinate is wrapped into [0, width); the vertical one is clamped to
/// [0, height - 1].
pub fn direction_to_equirect(dir: Direction, eq_width: usize, eq_height: usize) -> (f64, f64) {
    let u = (0.5 - dir.azimuth_deg() / 360.0) * eq_width as f64 - 0.5;
    let v = (0.5 - dir.elevation_deg() / 180.0) * eq_height as f64 - 0.5;
    (
        u.rem_euclid(eq_width as f64),
        v.clamp(0.0, (eq_height - 1) as f64),
    )
}

/// Precomputed per-output-pixel source coordinates for one camera/view
/// pair against one equirectangular size. Read-only and freely shareable
/// across threads.
#[derive(Debug, Clone)]
pub struct SamplingGrid {
    content_width: usize,
    content_height: usize,
    equirect_width: usize,
    equirect_height: usize,
    entries: Vec<(f64, f64)>,
}

impl SamplingGrid {
    /// Wraps precomputed entries (row-major, one per content pixel).
    pub fn from_entries(
        content_width: usize,
        content_height: usize,
        equirect_width: usize,
        equirect_height: usize,
        entries: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if entries.len() != content_width * content_height {
            return Err(Error::mismatch(format!(
                "{} grid entries for a {}x{} content image",
                entries.len(),
                content_width,
                content_height
            )));
        }
        Ok(SamplingGrid {
            content_width,
            content_height,
            equirect_width,
            equirect_height,
            entries,
        })
    }

    pub fn content_width(&self) -> usize {
        self.content_width
    }

    pub fn content_height(&self) -> usize {
        self.content_height
    }

    pub fn equirect_width(&self) -> usize {
        self.equirect_width
    }

    pub fn equirect_height(&self) -> usize {
        self.equirect_height
    }

    /// Source coordinate for the content pixel at (x, y).
    pub fn entry(&self, x: usize, y: usize) -> (f64, f64) {
        self.entries[y * self.content_width + x]
    }
}

/// Builds the remap table from an equirectangular image of the given size
/// to the camera's content image at the given view: one source coordinate
/// per content pixel, computed by casting a pinhole ray through the pixel
/// center.
pub fn build_projection_map(
    camera: &CameraSpec,
    view: ViewAngle,
    eq_width: usize,
    eq_height: usize,
) -> Result<SamplingGrid> {
    camera.validate()?;
    if eq_width == 0 || eq_height == 0 {
        return Err(Error::invalid("equirectangular size must be positive"));
    }
    let mut entries = Vec::with_capacity(camera.content_width * camera.content_height);
    for y in 0..camera.content_height {
        for x in 0..camera.content_width {
            let dir =
                pixel_to_direction(x as f64 + 0.5, y as f64 + 0.5, camera, view);
            entries.push(direction_to_equirect(dir, eq_width, eq_height));
        }
    }
    SamplingGrid::from_entries(
        camera.content_width,
        camera.content_height,
        eq_width,
        eq_height,
        entries,
    )
}

/// Resamples an equirectangular image through a grid: bilinear
/// interpolation with horizontal wraparound and vertical clamping.
pub fn project_equirect_to_perspective(image: &RgbImage, grid: &SamplingGrid) -> Result<RgbImage> {
    if image.width() != grid.equirect_width() || image.height() != grid.equirect_height() {
        return Err(Error::mismatch(format!(
            "image is {}x{} but the grid was built for {}x{}",
            image.width(),
            image.height(),
            grid.equirect_width(),
            grid.equirect_height()
        )));
    }
    let (w, h) = (grid.content_width(), grid.content_height());
    let (eq_w, eq_h) = (image.width(), image.height());
    let mut out = RgbImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (u, v) = grid.entry(x, y);
            let u0 = u.floor();
            let fu = u - u0;
            let i0 = (u0 as isize).rem_euclid(eq_w as isize) as usize;
            let i1 = (i0 + 1) % eq_w;
            let v0 = v.floor();
            let fv = v - v0;
            let j0 = (v0 as usize).min(eq_h - 1);
            let j1 = (j0 + 1).min(eq_h - 1);
            let p00 = image.pixel(i0, j0);
            let p10 = image.pixel(i1, j0);
            let p01 = image.pixel(i0, j1);
            let p11 = image.pixel(i1, j1);
            let mut rgb = [0u8; 3];
            for c in 0..3 {
                let top = (1.0 - fu) * p00[c] as f64 + fu * p10[c] as f64;
                let bottom = (1.0 - fu) * p01[c] as f64 + fu * p11[c] as f64;
                let value = (1.0 - fv) * top + fv * bottom;
                rgb[c] = value.round().clamp(0.0, 255.0) as u8;
            }
            out.set_pixel(x, y, rgb);
        }
    }
    Ok(out)
}

/// Centers a content image on a black canvas of the camera's canvas size.
/// For the default 256x144 content on a 256x256 canvas this adds 56 rows
/// of padding above and below.
pub fn pad_to_canvas(image: &RgbImage, camera: &CameraSpec) -> Result<RgbImage> {
    if image.width() > camera.canvas_width || image.height() > camera.canvas_height {
        return Err(Error::invalid(format!(
            "{}x{} image does not fit a {}x{} canvas",
            image.width(),
            image.height(),
            camera.canvas_width,
            camera.canvas_height
        )));
    }
    let left = (camera.canvas_width - image.width()) / 2;
    let top = (camera.canvas_height - image.height()) / 2;
    let mut out = RgbImage::new(camera.canvas_width, camera.canvas_height);
    for y in 0..image.height() {
        for x in 0..image.width() {
            out.set_pixel(x + left, y + top, image.pixel(x, y));
        }
    }
    Ok(out)
}

/// Vertical padding above the content for the given camera.
pub fn canvas_top_offset(camera: &CameraSpec) -> usize {
    (camera.canvas_height - camera.content_height) / 2
}
