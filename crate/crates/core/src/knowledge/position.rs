//! Speaker position feature: harmonic encoding, 1-D adaptive max pooling,
//! then `linear(O→D) → ReLU → linear(D→D)`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use super::{FeatureVec, Source, SpeakerPosition};
use crate::math;
use crate::numerics::{Matrix, NodeId, ParamStore, Tape};
use crate::{Error, Result};

/// Harmonic embedding of `pos` with `bands` octaves.
///
/// Band `k` contributes `[sin(2^k πx), cos(2^k πx), sin(2^k πy), cos(2^k πy)]`,
/// bands in ascending order, so the output has `4 * bands` entries.
pub fn encode_position_raw(pos: SpeakerPosition, bands: usize) -> Result<Vec<f64>> {
    if bands == 0 {
        return Err(Error::InvalidArgument(
            "position encoding needs at least one band".into(),
        ));
    }
    let mut out = Vec::with_capacity(4 * bands);
    for k in 0..bands {
        let freq = math::pow(2.0, k as f64) * PI;
        out.extend_from_slice(&[
            math::sin(freq * pos.x()),
            math::cos(freq * pos.x()),
            math::sin(freq * pos.y()),
            math::cos(freq * pos.y()),
        ]);
    }
    Ok(out)
}

/// Index ranges of the `out` pooling bins over an input of length `n`:
/// bin `i` covers `[⌊i·n/out⌋, ⌊(i+1)·n/out⌋)`.
pub fn pool_bins(n: usize, out: usize) -> Result<Vec<Range<usize>>> {
    if out == 0 || out > n {
        return Err(Error::InvalidArgument(alloc::format!(
            "adaptive pooling to {out} bins needs 1 <= bins <= {n}"
        )));
    }
    Ok((0..out)
        .map(|i| (i * n / out)..((i + 1) * n / out))
        .collect())
}

pub fn adaptive_max_pool(values: &[f64], out: usize) -> Result<Vec<f64>> {
    Ok(pool_bins(values.len(), out)?
        .into_iter()
        .map(|bin| {
            values[bin]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

/// Registry indices and hyper-parameters of the position encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositionMlp {
    pub bands: usize,
    pub pool: usize,
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
}

impl PositionMlp {
    /// Records `F_P` for `pos` on the tape.
    pub fn record(&self, tape: &mut Tape<'_>, pos: SpeakerPosition) -> Result<NodeId> {
        let raw = encode_position_raw(pos, self.bands)?;
        let pooled = adaptive_max_pool(&raw, self.pool)?;
        let input = tape.input(Matrix::row(&pooled));
        let (w1, b1, w2, b2) = (
            tape.param(self.w1),
            tape.param(self.b1),
            tape.param(self.w2),
            tape.param(self.b2),
        );
        let h = tape.matmul(input, w1)?;
        let h = tape.add_row(h, b1)?;
        let h = tape.relu(h);
        let out = tape.matmul(h, w2)?;
        tape.add_row(out, b2)
    }

    /// `F_P` as a plain feature vector.
    pub fn features(&self, params: &ParamStore, pos: SpeakerPosition) -> Result<FeatureVec> {
        let mut tape = Tape::new(params);
        let node = self.record(&mut tape, pos)?;
        FeatureVec::from_matrix(Source::Position, tape.value(node))
    }
}
