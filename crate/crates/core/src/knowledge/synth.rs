//! Deterministic stand-ins for extracted features and toy regression targets.

use alloc::vec::Vec;

use super::SpeakerPosition;
use crate::numerics::Rng;
use crate::{Error, Result};

/// Weights of the toy target on `mean(rgb)`, `mean(depth)`, `mean(semantic)`,
/// `x` and `y`. Every source carries signal.
pub const TOY_COEFFICIENTS: [f64; 5] = [1.0, 0.7, 0.5, 0.3, 0.3];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub rgb: Vec<f64>,
    pub depth: Vec<f64>,
    pub semantic: Vec<f64>,
    pub position: SpeakerPosition,
    pub target: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn toy_target(rgb: &[f64], depth: &[f64], semantic: &[f64], pos: SpeakerPosition) -> f64 {
    let [a, b, c, d, e] = TOY_COEFFICIENTS;
    a * mean(rgb) + b * mean(depth) + c * mean(semantic) + d * pos.x() + e * pos.y()
}

/// Draws rgb, depth, semantic (each `dim` values in `[-1, 1)`), then x, y.
pub fn synth_sample(rng: &mut Rng, dim: usize) -> Result<SyntheticSample> {
    if dim < 4 {
        return Err(Error::InvalidArgument(alloc::format!(
            "synthetic features need dim >= 4, got {dim}"
        )));
    }
    let rgb = rng.uniform_vec(dim, -1.0, 1.0);
    let depth = rng.uniform_vec(dim, -1.0, 1.0);
    let semantic = rng.uniform_vec(dim, -1.0, 1.0);
    let position = SpeakerPosition::new(rng.next_f64(), rng.next_f64())?;
    let target = toy_target(&rgb, &depth, &semantic, position);
    Ok(SyntheticSample {
        rgb,
        depth,
        semantic,
        position,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_features_at_origin_give_zero() {
        let z = vec![0.0; 8];
        assert_eq!(
            toy_target(&z, &z, &z, SpeakerPosition::new(0.0, 0.0).unwrap()),
            0.0
        );
    }

    #[test]
    fn ones_in_rgb_only_gives_one() {
        let z = vec![0.0; 8];
        let ones = vec![1.0; 8];
        assert_eq!(
            toy_target(&ones, &z, &z, SpeakerPosition::new(0.0, 0.0).unwrap()),
            1.0
        );
    }

    #[test]
    fn same_seed_same_sample() {
        let a = synth_sample(&mut Rng::new(5), 16).unwrap();
        let b = synth_sample(&mut Rng::new(5), 16).unwrap();
        assert_eq!(a, b);
        assert!(synth_sample(&mut Rng::new(5), 3).is_err());
    }

    #[test]
    fn every_source_moves_the_target() {
        let s = synth_sample(&mut Rng::new(77), 16).unwrap();
        let z = vec![0.0; 16];
        let origin = SpeakerPosition::new(0.0, 0.0).unwrap();
        let t = s.target;
        assert_ne!(t, toy_target(&z, &s.depth, &s.semantic, s.position));
        assert_ne!(t, toy_target(&s.rgb, &z, &s.semantic, s.position));
        assert_ne!(t, toy_target(&s.rgb, &s.depth, &z, s.position));
        assert_ne!(t, toy_target(&s.rgb, &s.depth, &s.semantic, origin));
    }
}
