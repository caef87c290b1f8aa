//! STFT and mel spectrogram front end.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::fft::{fft_in_place, Complex};
use super::Waveform;
use crate::math;
use crate::{Error, Result};

/// Energies are clamped to this value before any logarithm is taken.
pub const MEL_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub fft: usize,
    pub hop: usize,
    pub win: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            fft: 1024,
            hop: 256,
            win: 1024,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.fft.is_power_of_two() || self.fft < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "FFT size {} is not a power of two",
                self.fft
            )));
        }
        if self.win == 0 || self.win > self.fft || self.hop == 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "need 0 < win <= fft and hop > 0, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.fft / 2 + 1
    }

    /// Reflection padding on each side.
    pub fn pad(&self) -> usize {
        self.win / 2
    }

    /// Frames for a signal of `len` samples.
    pub fn frames(&self, len: usize) -> usize {
        1 + (len + 2 * self.pad() - self.win) / self.hop
    }
}

/// One-sided complex spectrogram, `frames × bins`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<Complex>,
}

impl Spectrogram {
    pub fn frame(&self, i: usize) -> &[Complex] {
        &self.data[i * self.bins..(i + 1) * self.bins]
    }
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * math::cos(2.0 * PI * i as f64 / n as f64))
        .collect()
}

/// Mirror padding that does not repeat the edge sample.
fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|i| x[i]));
    out.extend_from_slice(x);
    out.extend((0..pad).map(|i| x[n - 2 - i]));
    out
}

/// Short-time Fourier transform of `w`, centred frames.
///
/// The signal is reflection-padded by `win/2` on each side, which needs at
/// least `win/2 + 1` samples. Windows shorter than the FFT are zero-padded
/// at the end.
pub fn stft(w: &Waveform, cfg: &StftConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    let x = w.samples();
    let needed = cfg.pad() + 1;
    if x.len() < needed {
        return Err(Error::SignalTooShort {
            len: x.len(),
            needed,
        });
    }
    let padded = reflect_pad(x, cfg.pad());
    let window = hann(cfg.win);
    let frames = cfg.frames(x.len());
    let bins = cfg.bins();
    let mut data = Vec::with_capacity(frames * bins);
    let mut buf = vec![Complex::ZERO; cfg.fft];
    for f in 0..frames {
        let start = f * cfg.hop;
        buf.fill(Complex::ZERO);
        for (i, (s, h)) in padded[start..start + cfg.win]
            .iter()
            .zip(&window)
            .enumerate()
        {
            buf[i] = Complex::new(s * h, 0.0);
        }
        fft_in_place(&mut buf)?;
        data.extend_from_slice(&buf[..bins]);
    }
    Ok(Spectrogram { frames, bins, data })
}

/// HTK mel scale.
pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * math::log10(1.0 + f / 700.0)
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (math::pow(10.0, m / 2595.0) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelConfig {
    pub stft: StftConfig,
    pub n_mels: usize,
    pub fmin: f64,
    /// `None` means `sample_rate / 2`.
    pub fmax: Option<f64>,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            n_mels: 80,
            fmin: 0.0,
            fmax: None,
        }
    }
}

/// `n_mels × (fft/2 + 1)` bank of unnormalized triangles with peaks at
/// centres spaced uniformly on the mel scale.
pub fn mel_filterbank(
    sample_rate: u32,
    fft: usize,
    n_mels: usize,
    fmin: f64,
    fmax: f64,
) -> Result<Vec<Vec<f64>>> {
    let nyquist = sample_rate as f64 / 2.0;
    if sample_rate == 0 || n_mels == 0 || fft < 2 {
        return Err(Error::InvalidArgument(
            "filterbank needs positive rate, bands and FFT size".into(),
        ));
    }
    if !(fmin >= 0.0 && fmin < fmax && fmax <= nyquist) {
        return Err(Error::InvalidArgument(alloc::format!(
            "frequency bounds must satisfy 0 <= fmin < fmax <= {nyquist}, got [{fmin}, {fmax}]"
        )));
    }
    let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bins = fft / 2 + 1;
    let freqs: Vec<f64> = (0..bins)
        .map(|k| k as f64 * sample_rate as f64 / fft as f64)
        .collect();
    Ok((0..n_mels)
        .map(|m| {
            let (left, centre, right) = (edges[m], edges[m + 1], edges[m + 2]);
            freqs
                .iter()
                .map(|&f| {
                    let rise = (f - left) / (centre - left);
                    let fall = (right - f) / (right - centre);
                    rise.min(fall).max(0.0)
                })
                .collect()
        })
        .collect())
}

/// Mel energies, `frames × n_mels`, row-major, floored at [`MEL_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub n_mels: usize,
    pub frames: usize,
    pub values: Vec<f64>,
    pub sample_rate: u32,
    pub config: MelConfig,
}

impl MelSpectrogram {
    pub fn frame(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_mels..(i + 1) * self.n_mels]
    }
}

pub fn mel_spectrogram(w: &Waveform, cfg: &MelConfig) -> Result<MelSpectrogram> {
    let fmax = cfg.fmax.unwrap_or(w.sample_rate() as f64 / 2.0);
    let bank = mel_filterbank(w.sample_rate(), cfg.stft.fft, cfg.n_mels, cfg.fmin, fmax)?;
    let spec = stft(w, &cfg.stft)?;
    let mut values = Vec::with_capacity(spec.frames * cfg.n_mels);
    for f in 0..spec.frames {
        let power: Vec<f64> = spec.frame(f).iter().map(|c| c.norm_sqr()).collect();
        for row in &bank {
            let e: f64 = row.iter().zip(&power).map(|(a, b)| a * b).sum();
            values.push(e.max(MEL_FLOOR));
        }
    }
    Ok(MelSpectrogram {
        n_mels: cfg.n_mels,
        frames: spec.frames,
        values,
        sample_rate: w.sample_rate(),
        config: MelConfig {
            fmax: Some(fmax),
            ..*cfg
        },
    })
}
