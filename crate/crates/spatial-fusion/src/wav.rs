//! 16-bit PCM mono WAV input and output.

use std::io::Cursor;
use std::path::Path;

use spatial_fusion_core::acoustics::Waveform;

use crate::report::write_atomic;
use crate::{Error, Result};

const SCALE: f64 = 32768.0;

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("unsupported channel count {0}, expected mono")]
    UnsupportedChannels(u16),
    #[error("truncated file")]
    Truncated,
    #[error("malformed file: {0}")]
    Malformed(String),
}

impl From<hound::Error> for WavError {
    fn from(e: hound::Error) -> Self {
        match e {
            // Decoding reads from memory, so the only I/O failure is running
            // out of bytes.
            hound::Error::IoError(_) | hound::Error::UnfinishedSample => WavError::Truncated,
            hound::Error::Unsupported => WavError::UnsupportedEncoding("format not handled".into()),
            hound::Error::FormatError(msg) => WavError::Malformed(msg.into()),
            other => WavError::Malformed(other.to_string()),
        }
    }
}

pub fn decode_wav(bytes: &[u8]) -> Result<Waveform, WavError> {
    let reader = hound::WavReader::new(Cursor::new(bytes))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(WavError::UnsupportedEncoding(format!(
            "{:?} with {} bits per sample, expected 16-bit PCM",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    if spec.channels != 1 {
        return Err(WavError::UnsupportedChannels(spec.channels));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / SCALE))
        .collect::<Result<Vec<_>, _>>()?;
    if samples.is_empty() {
        return Err(WavError::Malformed("no samples".into()));
    }
    Waveform::new(spec.sample_rate, samples).map_err(|e| WavError::Malformed(e.to_string()))
}

/// Rounds to the nearest 16-bit code, clamping to the representable range.
pub fn encode_wav(w: &Waveform) -> Vec<u8> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: w.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut buf = Cursor::new(Vec::new());
    {
        let mut writer = hound::WavWriter::new(&mut buf, spec).expect("in-memory writer");
        for &s in w.samples() {
            let code = (s * SCALE).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(code).expect("in-memory write");
        }
        writer.finalize().expect("in-memory finalize");
    }
    buf.into_inner()
}

pub fn read_wav(path: &Path) -> Result<Waveform> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes).map_err(|source| Error::Wav {
        path: path.into(),
        source,
    })
}

pub fn write_wav(path: &Path, w: &Waveform) -> Result<()> {
    write_atomic(path, &encode_wav(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pcm(channels: u16, bits: u16, codes: &[i32]) -> Vec<u8> {
        let spec = hound::WavSpec {
            channels,
            sample_rate: 8000,
            bits_per_sample: bits,
            sample_format: hound::SampleFormat::Int,
        };
        let mut buf = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut buf, spec).unwrap();
        for &c in codes {
            w.write_sample(c).unwrap();
        }
        w.finalize().unwrap();
        buf.into_inner()
    }

    #[test]
    fn zero_pcm_reads_as_zero() {
        let w = decode_wav(&pcm(1, 16, &[0; 10])).unwrap();
        assert_eq!(w.samples(), &[0.0; 10]);
        assert_eq!(w.sample_rate(), 8000);
    }

    #[test]
    fn full_scale_negative_is_minus_one() {
        let w = decode_wav(&pcm(1, 16, &[-32768, 32767, 16384])).unwrap();
        assert_eq!(w.samples(), &[-1.0, 32767.0 / 32768.0, 0.5]);
    }

    #[test]
    fn stereo_rejected() {
        assert!(matches!(
            decode_wav(&pcm(2, 16, &[0, 0])),
            Err(WavError::UnsupportedChannels(2))
        ));
    }

    #[test]
    fn other_bit_depths_rejected() {
        assert!(matches!(
            decode_wav(&pcm(1, 8, &[0, 1])),
            Err(WavError::UnsupportedEncoding(_))
        ));
        assert!(matches!(
            decode_wav(&pcm(1, 24, &[0, 1])),
            Err(WavError::UnsupportedEncoding(_))
        ));
    }

    #[test]
    fn truncated_data_chunk() {
        let bytes = pcm(1, 16, &[1, 2, 3, 4]);
        assert!(matches!(
            decode_wav(&bytes[..bytes.len() - 3]),
            Err(WavError::Truncated)
        ));
        assert!(matches!(decode_wav(&bytes[..20]), Err(WavError::Truncated)));
    }

    #[test]
    fn not_riff_is_malformed() {
        assert!(matches!(
            decode_wav(b"not a wav file at all, just text"),
            Err(WavError::Malformed(_))
        ));
    }

    #[test]
    fn round_trip_is_exact_on_the_code_grid() {
        let samples: Vec<f64> = [-32768, -1, 0, 1, 12345, 32767]
            .iter()
            .map(|&c| c as f64 / 32768.0)
            .collect();
        let w = Waveform::new(16_000, samples).unwrap();
        assert_eq!(decode_wav(&encode_wav(&w)).unwrap(), w);
    }

    #[test]
    fn out_of_range_samples_clamp() {
        let w = Waveform::new(16_000, vec![1.5, -2.0]).unwrap();
        assert_eq!(
            decode_wav(&encode_wav(&w)).unwrap().samples(),
            &[32767.0 / 32768.0, -1.0]
        );
    }
}
