//! Sample-rate conversion, filtering, gain, clipping detection, and the
//! spectral features consumed by the sound-event localization model.

use crate::ambisonics::StereoBuffer;
use crate::error::{Error, Result};
use rustfft::{num_complex::Complex, FftPlanner};
use std::f64::consts::{PI, TAU};

/// Multichannel audio at a sample rate, samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveBuffer {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl WaveBuffer {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if channels.is_empty() {
            return Err(Error::invalid("buffer needs at least one channel"));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::mismatch("channel lengths differ".to_string()));
        }
        Ok(WaveBuffer {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Self {
        WaveBuffer {
            channels: vec![samples],
            sample_rate,
        }
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }
}

impl From<StereoBuffer> for WaveBuffer {
    fn from(st: StereoBuffer) -> Self {
        WaveBuffer {
            sample_rate: st.sample_rate,
            channels: vec![st.left, st.right],
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Taps per polyphase branch. Sets the transition bandwidth of the
/// anti-alias filter to about 8 * source_rate / TAPS_PER_PHASE Hz.
const TAPS_PER_PHASE: usize = 192;

fn blackman_harris(n: usize, len: usize) -> f64 {
    let t = TAU * n as f64 / (len - 1) as f64;
    0.35875 - 0.48829 * t.cos() + 0.14128 * (2.0 * t).cos() - 0.01168 * (3.0 * t).cos()
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Band-limited polyphase windowed-sinc sample-rate conversion.
///
/// The output holds `floor(len * target_rate / source_rate)` samples per
/// channel; the kernel is centered, so output sample `m` sits at time
/// `m / target_rate` with no group delay. Converting to the source rate
/// returns the input unchanged.
pub fn resample(buf: &WaveBuffer, target_rate: u32) -> WaveBuffer {
    assert!(target_rate > 0, "target rate must be positive");
    let source_rate = buf.sample_rate;
    if target_rate == source_rate {
        return buf.clone();
    }
    let g = gcd(source_rate as u64, target_rate as u64);
    let up = (target_rate as u64 / g) as usize; // upsampling factor L
    let down = (source_rate as u64 / g) as usize; // decimation factor M

    // Kernel at the upsampled rate source_rate * up, cut off at the
    // narrower of the two Nyquist frequencies.
    let kernel_len = TAPS_PER_PHASE * up + 1;
    let center = (kernel_len - 1) / 2;
    let cutoff_hz = 0.5 * source_rate.min(target_rate) as f64;
    let nu = cutoff_hz / (source_rate as f64 * up as f64);
    let kernel: Vec<f64> = (0..kernel_len)
        .map(|n| {
            let t = n as f64 - center as f64;
            2.0 * nu * sinc(2.0 * nu * t) * blackman_harris(n, kernel_len) * up as f64
        })
        .collect();

    let in_len = buf.len();
    let out_len = (in_len as u64 * up as u64 / down as u64) as usize;
    let mut channels = Vec::with_capacity(buf.channels.len());
    for ch in &buf.channels {
        let mut out = Vec::with_capacity(out_len);
        for m in 0..out_len {
            let base = (m * down + center) as i64;
            let j_hi = base.div_euclid(up as i64);
            let j_lo = (base - kernel_len as i64 + 1).div_euclid(up as i64)
                + i64::from((base - kernel_len as i64 + 1).rem_euclid(up as i64) != 0);
            let mut acc = 0.0;
            for j in j_lo..=j_hi {
                if (0..in_len as i64).contains(&j) {
                    let k = (base - j * up as i64) as usize;
                    acc += ch[j as usize] * kernel[k];
                }
            }
            out.push(acc);
        }
        channels.push(out);
    }
    WaveBuffer {
        channels,
        sample_rate: target_rate,
    }
}

/// Fixed high-pass cutoff applied ahead of the pipeline gain stage.
pub const HIGHPASS_CUTOFF_HZ: f64 = 100.0;

/// Causal 2nd-order Butterworth high-pass at [`HIGHPASS_CUTOFF_HZ`],
/// applied identically per channel from zero initial state.
pub fn highpass(buf: &WaveBuffer) -> WaveBuffer {
    let w0 = TAU * HIGHPASS_CUTOFF_HZ / buf.sample_rate as f64;
    let (sin_w, cos_w) = w0.sin_cos();
    let alpha = sin_w / (2.0 * std::f64::consts::FRAC_1_SQRT_2);
    let a0 = 1.0 + alpha;
    let b0 = (1.0 + cos_w) / 2.0 / a0;
    let b1 = -(1.0 + cos_w) / a0;
    let b2 = b0;
    let a1 = -2.0 * cos_w / a0;
    let a2 = (1.0 - alpha) / a0;

    let channels = buf
        .channels
        .iter()
        .map(|ch| {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            ch.iter()
                .map(|&x| {
                    let y = b0 * x + s1;
                    s1 = b1 * x - a1 * y + s2;
                    s2 = b2 * x - a2 * y;
                    y
                })
                .collect()
        })
        .collect();
    WaveBuffer {
        channels,
        sample_rate: buf.sample_rate,
    }
}

/// Scales every sample by `10^(gain_db / 20)`.
pub fn apply_gain_db(buf: &WaveBuffer, gain_db: f64) -> WaveBuffer {
    let gain = 10f64.powf(gain_db / 20.0);
    WaveBuffer {
        channels: buf
            .channels
            .iter()
            .map(|ch| ch.iter().map(|s| s * gain).collect())
            .collect(),
        sample_rate: buf.sample_rate,
    }
}

/// True iff any sample reaches or exceeds full scale (|s| >= 1.0).
pub fn is_clipping(buf: &WaveBuffer) -> bool {
    buf.channels
        .iter()
        .any(|ch| ch.iter().any(|s| s.abs() >= 1.0))
}

const STFT_WINDOW: usize = 512;
const STFT_HOP: usize = 160;

/// Spectral input features for the localization model: per-channel
/// amplitude spectrograms plus the inter-channel phase difference, stored
/// row-major as frames x bins.
#[derive(Debug, Clone)]
pub struct FeatureTensor {
    pub frames: usize,
    pub bins: usize,
    pub frame_rate: f64,
    pub amp_left: Vec<f64>,
    pub amp_right: Vec<f64>,
    pub ipd: Vec<f64>,
}

impl FeatureTensor {
    #[inline]
    pub fn index(&self, frame: usize, bin: usize) -> usize {
        frame * self.bins + bin
    }
}

fn wrap_phase(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// STFT features from 16 kHz stereo: 512-sample Hann window, 160-sample
/// hop (100 frames per second), amplitude per channel and wrapped
/// `phase(left) - phase(right)` per bin.
pub fn extract_seld_features(stereo: &WaveBuffer) -> Result<FeatureTensor> {
    if stereo.channels.len() != 2 {
        return Err(Error::invalid(format!(
            "feature extraction needs stereo input, got {} channels",
            stereo.channels.len()
        )));
    }
    let len = stereo.len();
    let frames = if len < STFT_WINDOW {
        0
    } else {
        (len - STFT_WINDOW) / STFT_HOP + 1
    };
    let bins = STFT_WINDOW / 2 + 1;
    let window: Vec<f64> = (0..STFT_WINDOW)
        .map(|n| 0.5 - 0.5 * (TAU * n as f64 / STFT_WINDOW as f64).cos())
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(STFT_WINDOW);

    let mut amp = [
        vec![0.0; frames * bins],
        vec![0.0; frames * bins],
    ];
    let mut phase = [
        vec![0.0; frames * bins],
        vec![0.0; frames * bins],
    ];
    let mut scratch = vec![Complex::new(0.0, 0.0); STFT_WINDOW];
    for (ci, ch) in stereo.channels.iter().enumerate() {
        for frame in 0..frames {
            let start = frame * STFT_HOP;
            for n in 0..STFT_WINDOW {
                scratch[n] = Complex::new(ch[start + n] * window[n], 0.0);
            }
            fft.process(&mut scratch);
            for b in 0..bins {
                amp[ci][frame * bins + b] = scratch[b].norm();
                phase[ci][frame * bins + b] = scratch[b].arg();
            }
        }
    }
    let ipd = phase[0]
        .iter()
        .zip(&phase[1])
        .map(|(l, r)| wrap_phase(l - r))
        .collect();
    let [amp_left, amp_right] = amp;
    Ok(FeatureTensor {
        frames,
        bins,
        frame_rate: stereo.sample_rate as f64 / STFT_HOP as f64,
        amp_left,
        amp_right,
        ipd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, rate: u32, seconds: f64, amplitude: f64) -> Vec<f64> {
        let n = (rate as f64 * seconds).round() as usize;
        (0..n)
            .map(|i| amplitude * (TAU * freq * i as f64 / rate as f64).sin())
            .collect()
    }

    fn rms(s: &[f64]) -> f64 {
        (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt()
    }

    /// Amplitude of a sinusoid at `freq` via quadrature projection over an
    /// interior window with an integer number of periods.
    fn fitted_amplitude(samples: &[f64], freq: f64, rate: u32, skip: usize, take: usize) -> f64 {
        let (mut s, mut c) = (0.0, 0.0);
        for i in 0..take {
            let t = TAU * freq * (skip + i) as f64 / rate as f64;
            s += samples[skip + i] * t.sin();
            c += samples[skip + i] * t.cos();
        }
        2.0 * (s * s + c * c).sqrt() / take as f64
    }

    #[test]
    fn resample_to_same_rate_is_identity() {
        let buf = WaveBuffer::mono(sine(440.0, 24000, 0.25, 0.5), 24000);
        let out = resample(&buf, 24000);
        assert_eq!(out, buf);
    }

    #[test]
    fn downsampled_sine_keeps_length_and_amplitude() {
        let buf = WaveBuffer::mono(sine(1000.0, 24000, 1.0, 1.0), 24000);
        let out = resample(&buf, 16000);
        assert_eq!(out.len(), 16000);
        assert_eq!(out.sample_rate(), 16000);
        // 1 kHz at 16 kHz: 16 samples per period, 8000 samples = 500 periods.
        let a = fitted_amplitude(&out.channels()[0], 1000.0, 16000, 4000, 8000);
        assert!((a - 1.0).abs() < 0.005, "amplitude {a}");
    }

    #[test]
    fn frequencies_above_target_nyquist_are_rejected() {
        let input = sine(11000.0, 24000, 1.0, 1.0);
        let in_rms = rms(&input);
        let out = resample(&WaveBuffer::mono(input, 24000), 16000);
        let interior = &out.channels()[0][2000..14000];
        assert!(rms(interior) / in_rms < 0.01);
    }

    #[test]
    fn upsampling_preserves_a_passband_tone() {
        let buf = WaveBuffer::mono(sine(1000.0, 16000, 0.5, 0.8), 16000);
        let out = resample(&buf, 24000);
        assert_eq!(out.len(), 12000);
        let a = fitted_amplitude(&out.channels()[0], 1000.0, 24000, 3000, 6000);
        assert!((a - 0.8).abs() < 0.004, "amplitude {a}");
    }

    #[test]
    fn resample_preserves_duration() {
        for (src, dst, n) in [(24000u32, 16000u32, 120000usize), (16000, 24000, 11111)] {
            let buf = WaveBuffer::mono(vec![0.1; n], src);
            let out = resample(&buf, dst);
            let d = (out.len() as f64 / dst as f64) - (n as f64 / src as f64);
            assert!(d.abs() < 1.0 / dst as f64, "{src}->{dst}: {d}");
        }
    }

    #[test]
    fn highpass_bleeds_off_dc() {
        let buf = WaveBuffer::mono(vec![0.5; 16000], 16000);
        let out = highpass(&buf);
        for &v in &out.channels()[0][8000..] {
            assert!(v.abs() < 1e-3, "residual {v}");
        }
    }

    #[test]
    fn highpass_leaves_speech_band_untouched() {
        let buf = WaveBuffer::mono(sine(1000.0, 16000, 1.0, 1.0), 16000);
        let out = highpass(&buf);
        let a = fitted_amplitude(&out.channels()[0], 1000.0, 16000, 4000, 8000);
        let db = 20.0 * a.log10();
        assert!(db.abs() < 0.1, "{db} dB at 1 kHz");
    }

    #[test]
    fn highpass_of_silence_is_silence() {
        let buf = WaveBuffer::mono(vec![0.0; 256], 16000);
        let out = highpass(&buf);
        assert!(out.channels()[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn highpass_is_linear() {
        let x = WaveBuffer::mono(sine(300.0, 16000, 0.1, 0.7), 16000);
        let y = WaveBuffer::mono(sine(2400.0, 16000, 0.1, 0.3), 16000);
        let (a, b) = (1.7, -0.6);
        let combined: Vec<f64> = x.channels()[0]
            .iter()
            .zip(&y.channels()[0])
            .map(|(xv, yv)| a * xv + b * yv)
            .collect();
        let lhs = highpass(&WaveBuffer::mono(combined, 16000));
        let hx = highpass(&x);
        let hy = highpass(&y);
        for i in 0..x.len() {
            let rhs = a * hx.channels()[0][i] + b * hy.channels()[0][i];
            assert!((lhs.channels()[0][i] - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn gain_matches_decibel_arithmetic() {
        let buf = WaveBuffer::mono(vec![0.001], 16000);
        let out = apply_gain_db(&buf, 38.0);
        assert!((out.channels()[0][0] - 0.07943282347242814).abs() < 1e-9);
        let identity = apply_gain_db(&buf, 0.0);
        assert_eq!(identity, buf);
    }

    #[test]
    fn gain_roundtrip_is_neutral() {
        let buf = WaveBuffer::mono(sine(333.0, 16000, 0.05, 0.9), 16000);
        let out = apply_gain_db(&apply_gain_db(&buf, 17.3), -17.3);
        for (a, b) in out.channels()[0].iter().zip(&buf.channels()[0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn clipping_detection_includes_the_boundary() {
        let inside = WaveBuffer::mono(vec![0.999, -0.999], 16000);
        assert!(!is_clipping(&inside));
        let boundary = WaveBuffer::mono(vec![0.2, 1.0], 16000);
        assert!(is_clipping(&boundary));
        let outside = WaveBuffer::mono(vec![-1.2], 16000);
        assert!(is_clipping(&outside));
    }

    fn stereo(left: Vec<f64>, right: Vec<f64>, rate: u32) -> WaveBuffer {
        WaveBuffer::new(vec![left, right], rate).unwrap()
    }

    #[test]
    fn features_require_stereo() {
        let mono = WaveBuffer::mono(vec![0.0; 1024], 16000);
        assert!(extract_seld_features(&mono).is_err());
    }

    #[test]
    fn identical_channels_have_zero_ipd() {
        let s = sine(520.0, 16000, 0.2, 0.5);
        let feats = extract_seld_features(&stereo(s.clone(), s, 16000)).unwrap();
        assert!(feats.ipd.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn five_second_clip_yields_497_frames_at_100_fps() {
        let s = vec![0.01; 80000];
        let feats = extract_seld_features(&stereo(s.clone(), s, 16000)).unwrap();
        assert_eq!(feats.frames, (80000 - 512) / 160 + 1);
        assert_eq!(feats.frames, 497);
        assert_eq!(feats.bins, 257);
        assert!((feats.frame_rate - 100.0).abs() < 1e-12);
    }

    #[test]
    fn one_khz_tone_peaks_at_bin_32() {
        let s = sine(1000.0, 16000, 0.5, 0.8);
        let feats = extract_seld_features(&stereo(s.clone(), s, 16000)).unwrap();
        let frame = feats.frames / 2;
        let row = &feats.amp_left[feats.index(frame, 0)..feats.index(frame, feats.bins)];
        let peak = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak, 32);
    }

    #[test]
    fn amplitudes_ignore_global_polarity_and_ipd_flips_on_swap() {
        let l = sine(700.0, 16000, 0.2, 0.6);
        let r = sine(700.0, 16000, 0.2, 0.4)
            .iter()
            .enumerate()
            .map(|(i, v)| v + 0.2 * (TAU * 1300.0 * i as f64 / 16000.0).cos())
            .collect::<Vec<_>>();

        let base = extract_seld_features(&stereo(l.clone(), r.clone(), 16000)).unwrap();
        let flipped = extract_seld_features(&stereo(
            l.iter().map(|v| -v).collect(),
            r.iter().map(|v| -v).collect(),
            16000,
        ))
        .unwrap();
        for (a, b) in base.amp_left.iter().zip(&flipped.amp_left) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in base.amp_right.iter().zip(&flipped.amp_right) {
            assert!((a - b).abs() < 1e-12);
        }

        let swapped = extract_seld_features(&stereo(r, l, 16000)).unwrap();
        for (a, b) in base.ipd.iter().zip(&swapped.ipd) {
            assert!(wrap_phase(a + b).abs() < 1e-9, "{a} + {b}");
        }
    }

    #[test]
    fn short_input_has_no_frames() {
        let s = vec![0.0; 511];
        let feats = extract_seld_features(&stereo(s.clone(), s, 16000)).unwrap();
        assert_eq!(feats.frames, 0);
    }
}
