//! First-order Ambisonics rotation about the vertical axis and the
//! stereo downmix `left = W + Y`, `right = W - Y`.
//!
//! Buffers use ACN channel order (W, Y, Z, X) with SN3D normalization,
//! matching the delivery format of the source recordings.

use crate::error::{Error, Result};
use crate::geometry::Direction;

/// Four-channel first-order Ambisonics block.
#[derive(Debug, Clone, PartialEq)]
pub struct FoaBuffer {
    /// ACN order: W, Y, Z, X.
    channels: [Vec<f64>; 4],
    sample_rate: u32,
}

impl FoaBuffer {
    pub fn new(
        w: Vec<f64>,
        y: Vec<f64>,
        z: Vec<f64>,
        x: Vec<f64>,
        sample_rate: u32,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        let len = w.len();
        if y.len() != len || z.len() != len || x.len() != len {
            return Err(Error::mismatch(format!(
                "FOA channel lengths differ: W={} Y={} Z={} X={}",
                len,
                y.len(),
                z.len(),
                x.len()
            )));
        }
        Ok(FoaBuffer {
            channels: [w, y, z, x],
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn w(&self) -> &[f64] {
        &self.channels[0]
    }

    pub fn y(&self) -> &[f64] {
        &self.channels[1]
    }

    pub fn z(&self) -> &[f64] {
        &self.channels[2]
    }

    pub fn x(&self) -> &[f64] {
        &self.channels[3]
    }

    /// Channels in ACN order.
    pub fn channels(&self) -> &[Vec<f64>; 4] {
        &self.channels
    }

    /// Sample range [start, end) as a new buffer.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.len() {
            return Err(Error::invalid(format!(
                "slice {}..{} out of range for {} samples",
                start,
                end,
                self.len()
            )));
        }
        Ok(FoaBuffer {
            channels: [
                self.channels[0][start..end].to_vec(),
                self.channels[1][start..end].to_vec(),
                self.channels[2][start..end].to_vec(),
                self.channels[3][start..end].to_vec(),
            ],
            sample_rate: self.sample_rate,
        })
    }
}

/// Two-channel audio block.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoBuffer {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub sample_rate: u32,
}

impl StereoBuffer {
    pub fn new(left: Vec<f64>, right: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::mismatch(format!(
                "stereo channel lengths differ: {} vs {}",
                left.len(),
                right.len()
            )));
        }
        Ok(StereoBuffer {
            left,
            right,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

/// Rotates the sound field about the vertical axis so that a source at
/// azimuth `phi` appears at `phi - yaw` afterwards. W and Z pass through;
/// the horizontal dipole pair rotates per sample:
/// `X' = X cos a + Y sin a`, `Y' = -X sin a + Y cos a`.
pub fn rotate_foa_yaw(foa: &FoaBuffer, yaw_deg: f64) -> FoaBuffer {
    let (sin_a, cos_a) = yaw_deg.to_radians().sin_cos();
    let n = foa.len();
    let mut x_out = Vec::with_capacity(n);
    let mut y_out = Vec::with_capacity(n);
    for i in 0..n {
        let x = foa.x()[i];
        let y = foa.y()[i];
        x_out.push(x * cos_a + y * sin_a);
        y_out.push(-x * sin_a + y * cos_a);
    }
    FoaBuffer {
        channels: [foa.w().to_vec(), y_out, foa.z().to_vec(), x_out],
        sample_rate: foa.sample_rate,
    }
}

/// Downmixes FOA to stereo: `left = W + Y`, `right = W - Y`. No loudness
/// compensation is applied.
pub fn foa_to_stereo(foa: &FoaBuffer) -> StereoBuffer {
    let left = foa
        .w()
        .iter()
        .zip(foa.y())
        .map(|(w, y)| w + y)
        .collect();
    let right = foa
        .w()
        .iter()
        .zip(foa.y())
        .map(|(w, y)| w - y)
        .collect();
    StereoBuffer {
        left,
        right,
        sample_rate: foa.sample_rate,
    }
}

/// Encodes a signal as an ideal plane wave arriving from `dir` (SN3D
/// first-order gains: W = s, X = s cos(az) cos(el), Y = s sin(az) cos(el),
/// Z = s sin(el)).
pub fn encode_plane_wave(signal: &[f64], dir: Direction, sample_rate: u32) -> FoaBuffer {
    let az = dir.azimuth_deg().to_radians();
    let el = dir.elevation_deg().to_radians();
    let gx = az.cos() * el.cos();
    let gy = az.sin() * el.cos();
    let gz = el.sin();
    FoaBuffer {
        channels: [
            signal.to_vec(),
            signal.iter().map(|s| s * gy).collect(),
            signal.iter().map(|s| s * gz).collect(),
            signal.iter().map(|s| s * gx).collect(),
        ],
        sample_rate,
    }
}
