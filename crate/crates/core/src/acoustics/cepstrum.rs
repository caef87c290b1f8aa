use alloc::vec::Vec;
use core::f64::consts::PI;

use super::spectral::{MelSpectrogram, MEL_FLOOR};
use crate::math;
use crate::{Error, Result};

/// Mel-cepstral coefficients `1..=K` per frame, row-major `frames × K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CepstraSequence {
    k: usize,
    data: Vec<f64>,
}

impl CepstraSequence {
    pub fn new(k: usize, data: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "cepstra need at least one coefficient".into(),
            ));
        }
        if !data.len().is_multiple_of(k) {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} values do not split into frames of {k}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "cepstral coefficients must be finite".into(),
            ));
        }
        Ok(Self { k, data })
    }

    pub fn from_frames(frames: &[Vec<f64>]) -> Result<Self> {
        let k = frames.first().map(Vec::len).unwrap_or(0);
        if frames.iter().any(|f| f.len() != k) {
            return Err(Error::InvalidArgument("ragged cepstral frames".into()));
        }
        Self::new(k, frames.concat())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn frames(&self) -> usize {
        self.data.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Orthonormal DCT-II.
pub fn dct2_ortho(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    (0..x.len())
        .map(|k| {
            let scale = if k == 0 {
                math::sqrt(1.0 / n)
            } else {
                math::sqrt(2.0 / n)
            };
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * math::cos(PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)))
                .sum();
            scale * s
        })
        .collect()
}

/// Per frame: `DCT-II(ln(energies))`, keeping coefficients `1..=k`.
pub fn mel_cepstrum(m: &MelSpectrogram, k: usize) -> Result<CepstraSequence> {
    if k == 0 || k >= m.n_mels {
        return Err(Error::InvalidArgument(alloc::format!(
            "need 1 <= K < n_mels = {}, got K = {k}",
            m.n_mels
        )));
    }
    let mut data = Vec::with_capacity(m.frames * k);
    for f in 0..m.frames {
        let logs: Vec<f64> = m
            .frame(f)
            .iter()
            .map(|&e| math::ln(e.max(MEL_FLOOR)))
            .collect();
        data.extend_from_slice(&dct2_ortho(&logs)[1..=k]);
    }
    CepstraSequence::new(k, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::MelConfig;
    use alloc::vec;

    fn mel(n_mels: usize, values: Vec<f64>) -> MelSpectrogram {
        MelSpectrogram {
            n_mels,
            frames: values.len() / n_mels,
            values,
            sample_rate: 16_000,
            config: MelConfig::default(),
        }
    }

    #[test]
    fn ramp_hand_case() {
        let e = core::f64::consts::E;
        let m = mel(4, vec![e, e * e, e * e * e, e * e * e * e]);
        let c = mel_cepstrum(&m, 3).unwrap();
        // Orthonormal DCT-II of [1, 2, 3, 4], evaluated independently.
        let expected = [-2.230442497387663, 0.0, -0.15851266778110815];
        for (a, b) in c.frame(0).iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{:?}", c.frame(0));
        }
    }

    #[test]
    fn constant_frame_has_no_kept_energy() {
        let c = mel_cepstrum(&mel(80, vec![0.37; 160]), 13).unwrap();
        assert_eq!(c.frames(), 2);
        assert!(c.as_slice().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn doubling_energies_only_moves_c0() {
        let vals: Vec<f64> = (0..80)
            .map(|i| 1e-3 * (1.0 + (i as f64 * 0.7).sin().abs()))
            .collect();
        let doubled: Vec<f64> = vals.iter().map(|v| v * 2.0).collect();
        let a = mel_cepstrum(&mel(80, vals), 13).unwrap();
        let b = mel_cepstrum(&mel(80, doubled), 13).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn k_bounds() {
        assert!(mel_cepstrum(&mel(4, vec![1.0; 4]), 4).is_err());
        assert!(mel_cepstrum(&mel(4, vec![1.0; 4]), 0).is_err());
    }

    #[test]
    fn dct_is_orthonormal() {
        let x = [0.3, -1.2, 2.5, 0.0, 4.4];
        let y = dct2_ortho(&x);
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ey: f64 = y.iter().map(|v| v * v).sum();
        assert!((ex - ey).abs() < 1e-12);
    }
}
