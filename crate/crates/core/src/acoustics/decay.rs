//! Schroeder energy decay, RT60 and RT60 error.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::waveform::check_rates;
use super::Waveform;
use crate::math;
use crate::numerics::Rng;
use crate::{Error, Result};

/// Energy ratios below this are reported as −300 dB instead of −∞.
const RATIO_FLOOR: f64 = 1e-30;

/// Length of the short-time energy windows used by the decay guard.
const ENVELOPE_WINDOW_S: f64 = 0.01;

/// Schroeder backward-integrated energy in dB, one value per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    sample_rate: u32,
    db: Vec<f64>,
}

impl DecayCurve {
    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn db(&self) -> &[f64] {
        &self.db
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.db.len()).map(|i| self.time(i)).collect()
    }

    /// Lowest level reached.
    pub fn floor_db(&self) -> f64 {
        self.db.iter().copied().fold(0.0, f64::min)
    }

    /// First sample at or below `level_db`.
    pub fn crossing(&self, level_db: f64) -> Option<usize> {
        self.db.iter().position(|&v| v <= level_db)
    }
}

pub fn schroeder_edc(w: &Waveform) -> Result<DecayCurve> {
    if w.is_silent() {
        return Err(Error::SilentSignal);
    }
    let x = w.samples();
    let mut tail = alloc::vec![0.0; x.len()];
    let mut acc = 0.0;
    for i in (0..x.len()).rev() {
        acc += x[i] * x[i];
        tail[i] = acc;
    }
    let total = tail[0];
    let db = tail
        .iter()
        .map(|&e| 10.0 * math::log10((e / total).max(RATIO_FLOOR)))
        .collect();
    Ok(DecayCurve {
        sample_rate: w.sample_rate(),
        db,
    })
}

/// Linear fit window on the decay curve, both bounds in dB, `fit_hi < fit_lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rt60Config {
    pub fit_lo: f64,
    pub fit_hi: f64,
}

impl Default for Rt60Config {
    fn default() -> Self {
        Self {
            fit_lo: -5.0,
            fit_hi: -25.0,
        }
    }
}

impl Rt60Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.fit_hi < self.fit_lo && self.fit_lo <= 0.0 && self.fit_hi.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "fit range needs fit_hi < fit_lo <= 0 dB, got [{}, {}]",
                self.fit_hi,
                self.fit_lo
            )));
        }
        Ok(())
    }
}

/// Least-squares line through the curve where `fit_hi ≤ EDC ≤ fit_lo`;
/// returns `−60 / slope` in seconds.
pub fn rt60_estimate(edc: &DecayCurve, cfg: &Rt60Config) -> Result<f64> {
    cfg.validate()?;
    let reached = edc.floor_db();
    if reached > cfg.fit_hi {
        return Err(Error::InsufficientDecay {
            reached_db: reached,
            needed_db: cfg.fit_hi,
        });
    }
    let (mut n, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &y) in edc.db().iter().enumerate() {
        if (cfg.fit_hi..=cfg.fit_lo).contains(&y) {
            let t = edc.time(i);
            n += 1.0;
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
    }
    let denom = n * stt - st * st;
    let slope = if n >= 2.0 && denom > 0.0 {
        (n * sty - st * sy) / denom
    } else {
        0.0
    };
    if slope.is_nan() || slope >= 0.0 {
        return Err(Error::DegenerateFit { slope });
    }
    Ok(-60.0 / slope)
}

/// Energies of consecutive non-overlapping windows of `len` samples.
fn short_time_energy(x: &[f64], len: usize) -> Vec<f64> {
    x.chunks(len)
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64)
        .collect()
}

/// RT60 of a waveform.
///
/// On a finite recording the backward integral always falls to −∞ at the
/// end, so the curve alone cannot tell real decay from a signal that is
/// simply cut off. Before fitting, the short-time energy where the curve
/// crosses `fit_hi` must sit at least `|fit_hi|/2` dB below the loudest
/// window before it; otherwise the signal is reported as not decaying.
pub fn rt60(w: &Waveform, cfg: &Rt60Config) -> Result<f64> {
    cfg.validate()?;
    let edc = schroeder_edc(w)?;
    let crossing = edc.crossing(cfg.fit_hi).ok_or(Error::InsufficientDecay {
        reached_db: edc.floor_db(),
        needed_db: cfg.fit_hi,
    })?;
    let len = ((ENVELOPE_WINDOW_S * w.sample_rate() as f64) as usize).max(1);
    let energy = short_time_energy(w.samples(), len);
    let at = (crossing / len).min(energy.len() - 1);
    let peak = energy[..=at].iter().copied().fold(0.0, f64::max);
    let drop_db = 10.0 * math::log10((energy[at] / peak).max(RATIO_FLOOR));
    let needed = cfg.fit_hi / 2.0;
    if drop_db > needed {
        return Err(Error::InsufficientDecay {
            reached_db: drop_db,
            needed_db: needed,
        });
    }
    rt60_estimate(&edc, cfg)
}

/// `|RT60(pred) − RT60(target)|` in seconds.
pub fn rte(pred: &Waveform, target: &Waveform, cfg: &Rt60Config) -> Result<f64> {
    check_rates(pred, target)?;
    let side = |name: &'static str, w: &Waveform| {
        rt60(w, cfg).map_err(|e| Error::Estimator {
            side: name,
            source: Box::new(e),
        })
    };
    Ok((side("pred", pred)? - side("target", target)?).abs())
}

/// Uniform noise under the envelope `exp(−3·ln10·t/T60)`, whose energy
/// falls by 60 dB every `t60` seconds.
pub fn synth_decay(rng: &mut Rng, t60: f64, sample_rate: u32, duration: f64) -> Result<Waveform> {
    if !(t60 > 0.0 && duration > 0.0) {
        return Err(Error::InvalidArgument(
            "decay time and duration must be positive".into(),
        ));
    }
    let n = (duration * sample_rate as f64) as usize;
    let k = -3.0 * core::f64::consts::LN_10 / t60;
    let samples = (0..n)
        .map(|i| rng.uniform(-1.0, 1.0) * math::exp(k * i as f64 / sample_rate as f64))
        .collect();
    Waveform::new(sample_rate, samples)
}
