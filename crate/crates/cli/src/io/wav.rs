//! WAV reading (16/24-bit PCM and 32-bit float, any channel count) and
//! 16-bit PCM writing.

use anyhow::{bail, Context, Result};
use sav_core::ambisonics::FoaBuffer;
use sav_core::dsp::WaveBuffer;
use std::path::Path;

/// Reads a WAV file into deinterleaved float channels at unit full scale.
pub fn read_wav(path: &Path) -> Result<WaveBuffer> {
    let mut reader =
        hound::WavReader::open(path).with_context(|| format!("opening {}", path.display()))?;
    let spec = reader.spec();
    let n_channels = spec.channels as usize;
    if n_channels == 0 {
        bail!("{}: zero channels", path.display());
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        (hound::SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()?
        }
        (fmt, bits) => bail!(
            "{}: unsupported sample format {:?} at {} bits",
            path.display(),
            fmt,
            bits
        ),
    };
    let frames = interleaved.len() / n_channels;
    let mut channels = vec![Vec::with_capacity(frames); n_channels];
    for (i, s) in interleaved.iter().enumerate() {
        channels[i % n_channels].push(*s);
    }
    Ok(WaveBuffer::new(channels, spec.sample_rate)?)
}

/// Reads a 4-channel first-order Ambisonics WAV (ACN order W, Y, Z, X).
pub fn read_foa(path: &Path) -> Result<FoaBuffer> {
    let buf = read_wav(path)?;
    if buf.channels().len() != 4 {
        bail!(
            "{}: expected 4-channel Ambisonics audio, found {} channels",
            path.display(),
            buf.channels().len()
        );
    }
    let mut it = buf.channels().iter().cloned();
    let (w, y, z, x) = (
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    );
    Ok(FoaBuffer::new(w, y, z, x, buf.sample_rate())?)
}

/// Writes a buffer as 16-bit PCM. Samples are expected inside (-1, 1);
/// anything beyond is clamped at the integer boundary.
pub fn write_wav_i16(path: &Path, buf: &WaveBuffer) -> Result<()> {
    let spec = hound::WavSpec {
        channels: buf.channels().len() as u16,
        sample_rate: buf.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)
        .with_context(|| format!("creating {}", path.display()))?;
    for i in 0..buf.len() {
        for ch in buf.channels() {
            let v = (ch[i] * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(v)?;
        }
    }
    writer.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm16_roundtrip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let samples: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.1).sin() * 0.8).collect();
        let buf = WaveBuffer::new(vec![samples.clone(), samples.clone()], 16000).unwrap();
        write_wav_i16(&path, &buf).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.channels().len(), 2);
        assert_eq!(back.sample_rate(), 16000);
        for (a, b) in back.channels()[0].iter().zip(&samples) {
            assert!((a - b).abs() < 1.0 / 32000.0);
        }
    }

    #[test]
    fn float_wav_reads_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.wav");
        let spec = hound::WavSpec {
            channels: 4,
            sample_rate: 24000,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut writer = hound::WavWriter::create(&path, spec).unwrap();
        for i in 0..100 {
            for c in 0..4 {
                writer.write_sample((i as f32 * 0.01) + c as f32).unwrap();
            }
        }
        writer.finalize().unwrap();
        let foa = read_foa(&path).unwrap();
        assert_eq!(foa.len(), 100);
        assert_eq!(foa.sample_rate(), 24000);
        assert!((foa.y()[3] - 1.03f32 as f64).abs() < 1e-9);
    }

    #[test]
    fn foa_requires_four_channels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("st.wav");
        let buf = WaveBuffer::new(vec![vec![0.0; 8], vec![0.0; 8]], 24000).unwrap();
        write_wav_i16(&path, &buf).unwrap();
        assert!(read_foa(&path).is_err());
    }
}
