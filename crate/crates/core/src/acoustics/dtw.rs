//! Dynamic time warping and mel cepstral distortion.

use alloc::vec;
use alloc::vec::Vec;

use super::cepstrum::{mel_cepstrum, CepstraSequence};
use super::spectral::{mel_spectrogram, MelConfig};
use super::waveform::check_rates;
use super::Waveform;
use crate::math;
use crate::{Error, Result};

/// `10/ln 10 · √2`, the per-frame MCD factor on a Euclidean distance.
pub const MCD_SCALE: f64 = 10.0 / core::f64::consts::LN_10 * core::f64::consts::SQRT_2;

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn check_pair(a: &CepstraSequence, b: &CepstraSequence) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("cepstral sequence"));
    }
    if a.k() != b.k() {
        return Err(Error::ShapeMismatch {
            op: "cepstral order",
            left: (a.frames(), a.k()),
            right: (b.frames(), b.k()),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub path: Vec<(usize, usize)>,
    /// Sum of Euclidean frame distances along `path`.
    pub cost: f64,
}

/// Minimum-cost monotone alignment with steps `(1,0)`, `(0,1)`, `(1,1)`.
/// Ties during backtracking go to the diagonal, then to `(i−1, j)`.
pub fn dtw_align(a: &CepstraSequence, b: &CepstraSequence) -> Result<Alignment> {
    check_pair(a, b)?;
    let (n, m) = (a.frames(), b.frames());
    let mut acc = vec![f64::INFINITY; n * m];
    for i in 0..n {
        for j in 0..m {
            let d = euclidean(a.frame(i), b.frame(j));
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 {
                    acc[(i - 1) * m + j - 1]
                } else {
                    f64::INFINITY
                };
                let up = if i > 0 {
                    acc[(i - 1) * m + j]
                } else {
                    f64::INFINITY
                };
                let left = if j > 0 {
                    acc[i * m + j - 1]
                } else {
                    f64::INFINITY
                };
                diag.min(up).min(left)
            };
            acc[i * m + j] = best + d;
        }
    }
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        let diag = if i > 0 && j > 0 {
            acc[(i - 1) * m + j - 1]
        } else {
            f64::INFINITY
        };
        let up = if i > 0 {
            acc[(i - 1) * m + j]
        } else {
            f64::INFINITY
        };
        let left = if j > 0 {
            acc[i * m + j - 1]
        } else {
            f64::INFINITY
        };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i, j));
    }
    path.reverse();
    Ok(Alignment {
        path,
        cost: acc[n * m - 1],
    })
}

/// Mean per-frame `(10/ln10)·sqrt(2·Σ(c − c')²)` over the DTW path, or over
/// the first `min(n, m)` frame pairs when `use_dtw` is off.
pub fn mcd(pred: &CepstraSequence, target: &CepstraSequence, use_dtw: bool) -> Result<f64> {
    check_pair(pred, target)?;
    let pairs: Vec<(usize, usize)> = if use_dtw {
        dtw_align(pred, target)?.path
    } else {
        (0..pred.frames().min(target.frames()))
            .map(|i| (i, i))
            .collect()
    };
    let total: f64 = pairs
        .iter()
        .map(|&(i, j)| MCD_SCALE * euclidean(pred.frame(i), target.frame(j)))
        .sum();
    Ok(total / pairs.len() as f64)
}

/// Cepstral settings for waveform-level MCD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McdConfig {
    pub mel: MelConfig,
    pub k: usize,
    pub use_dtw: bool,
}

impl Default for McdConfig {
    fn default() -> Self {
        Self {
            mel: MelConfig::default(),
            k: 13,
            use_dtw: true,
        }
    }
}

/// Mel cepstra of a waveform.
pub fn waveform_cepstra(w: &Waveform, cfg: &McdConfig) -> Result<CepstraSequence> {
    mel_cepstrum(&mel_spectrogram(w, &cfg.mel)?, cfg.k)
}

pub fn mcd_waveforms(pred: &Waveform, target: &Waveform, cfg: &McdConfig) -> Result<f64> {
    check_rates(pred, target)?;
    mcd(
        &waveform_cepstra(pred, cfg)?,
        &waveform_cepstra(target, cfg)?,
        cfg.use_dtw,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn seq(frames: &[Vec<f64>]) -> CepstraSequence {
        CepstraSequence::from_frames(frames).unwrap()
    }

    fn random_seq(rng: &mut Rng, n: usize, k: usize) -> CepstraSequence {
        seq(&(0..n)
            .map(|_| rng.uniform_vec(k, -2.0, 2.0))
            .collect::<Vec<_>>())
    }

    /// Every monotone path from (0,0) to (n−1,m−1), cost summed from the start.
    fn brute_force(a: &CepstraSequence, b: &CepstraSequence) -> f64 {
        fn walk(
            a: &CepstraSequence,
            b: &CepstraSequence,
            i: usize,
            j: usize,
            acc: f64,
            best: &mut f64,
        ) {
            let acc = acc + euclidean(a.frame(i), b.frame(j));
            if (i, j) == (a.frames() - 1, b.frames() - 1) {
                *best = best.min(acc);
                return;
            }
            if i + 1 < a.frames() && j + 1 < b.frames() {
                walk(a, b, i + 1, j + 1, acc, best);
            }
            if i + 1 < a.frames() {
                walk(a, b, i + 1, j, acc, best);
            }
            if j + 1 < b.frames() {
                walk(a, b, i, j + 1, acc, best);
            }
        }
        let mut best = f64::INFINITY;
        walk(a, b, 0, 0, 0.0, &mut best);
        best
    }

    #[test]
    fn matches_brute_force_exactly() {
        let mut rng = Rng::new(17);
        for n in 1..=6 {
            for m in 1..=6 {
                for _ in 0..4 {
                    let (a, b) = (random_seq(&mut rng, n, 3), random_seq(&mut rng, m, 3));
                    let al = dtw_align(&a, &b).unwrap();
                    assert_eq!(al.cost, brute_force(&a, &b), "n={n} m={m}");
                    let along: f64 = al
                        .path
                        .iter()
                        .fold(0.0, |s, &(i, j)| s + euclidean(a.frame(i), b.frame(j)));
                    assert_eq!(along, al.cost);
                }
            }
        }
    }

    #[test]
    fn path_is_monotone_and_anchored() {
        let mut rng = Rng::new(18);
        let (a, b) = (random_seq(&mut rng, 9, 4), random_seq(&mut rng, 5, 4));
        let p = dtw_align(&a, &b).unwrap().path;
        assert_eq!(p[0], (0, 0));
        assert_eq!(*p.last().unwrap(), (8, 4));
        for w in p.windows(2) {
            let step = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            assert!([(1, 0), (0, 1), (1, 1)].contains(&step));
        }
    }

    #[test]
    fn identical_sequences_take_the_diagonal() {
        let a = random_seq(&mut Rng::new(19), 5, 3);
        let al = dtw_align(&a, &a).unwrap();
        assert_eq!(al.cost, 0.0);
        assert_eq!(al.path, (0..5).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn duplicated_frame_costs_nothing() {
        let mut rng = Rng::new(20);
        let frames: Vec<Vec<f64>> = (0..5).map(|_| rng.uniform_vec(3, -2.0, 2.0)).collect();
        let mut dup = frames.clone();
        dup.insert(2, frames[2].clone());
        let al = dtw_align(&seq(&frames), &seq(&dup)).unwrap();
        assert_eq!(al.cost, 0.0);
        assert_eq!(al.path.len(), 6);
    }

    #[test]
    fn ties_prefer_diagonal_then_advancing_the_first_sequence() {
        // All frames equal: every path costs 0, backtracking takes the diagonal
        // until one index hits 0.
        let a = seq(&[vec![1.0], vec![1.0], vec![1.0]]);
        let b = seq(&[vec![1.0], vec![1.0]]);
        assert_eq!(
            dtw_align(&a, &b).unwrap().path,
            vec![(0, 0), (1, 0), (2, 1)]
        );
    }

    #[test]
    fn dtw_cost_never_exceeds_padded_diagonal() {
        let mut rng = Rng::new(21);
        for _ in 0..50 {
            let (a, b) = (random_seq(&mut rng, 7, 2), random_seq(&mut rng, 4, 2));
            let naive: f64 = (0..7)
                .map(|i| euclidean(a.frame(i), b.frame(i.min(3))))
                .sum();
            assert!(dtw_align(&a, &b).unwrap().cost <= naive);
        }
    }

    #[test]
    fn mcd_unit_offset_and_homogeneity() {
        let mut rng = Rng::new(22);
        let base: Vec<Vec<f64>> = (0..6).map(|_| rng.uniform_vec(13, -1.0, 1.0)).collect();
        for (delta, use_dtw) in [(1.0, true), (1.0, false), (2.5, false)] {
            let shifted: Vec<Vec<f64>> = base
                .iter()
                .map(|f| {
                    let mut g = f.clone();
                    g[4] += delta;
                    g
                })
                .collect();
            let v = mcd(&seq(&shifted), &seq(&base), use_dtw).unwrap();
            assert!((v - delta * 6.141851463713754).abs() < 1e-9, "{v}");
        }
        assert!((MCD_SCALE - 6.1416).abs() < 1e-3);
    }

    #[test]
    fn mcd_zero_symmetric_nonnegative() {
        let mut rng = Rng::new(23);
        for _ in 0..20 {
            let (a, b) = (random_seq(&mut rng, 5, 4), random_seq(&mut rng, 5, 4));
            assert_eq!(mcd(&a, &a, true).unwrap(), 0.0);
            let (ab, ba) = (mcd(&a, &b, false).unwrap(), mcd(&b, &a, false).unwrap());
            assert!(ab > 0.0);
            assert!((ab - ba).abs() < 1e-12);
        }
    }

    #[test]
    fn mcd_truncates_without_dtw() {
        let a = seq(&[vec![0.0], vec![1.0], vec![5.0]]);
        let b = seq(&[vec![0.0], vec![1.0]]);
        assert_eq!(mcd(&a, &b, false).unwrap(), 0.0);
    }

    #[test]
    fn order_mismatch_and_empty_rejected() {
        let a = seq(&[vec![0.0, 1.0]]);
        let b = seq(&[vec![0.0]]);
        assert!(mcd(&a, &b, true).is_err());
        let empty = CepstraSequence::new(2, Vec::new()).unwrap();
        assert_eq!(
            dtw_align(&empty, &a),
            Err(Error::EmptyInput("cepstral sequence"))
        );
    }
}
