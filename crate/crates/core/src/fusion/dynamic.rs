//! Entropy-weighted dynamic fusion of the three refined sources.

use crate::math;
use crate::numerics::{Axis, Matrix, NodeId, ParamStore, Tape};
use crate::{Error, Result};

/// Shannon entropy (nats) of `softmax(v)`.
pub fn entropy(v: &[f64]) -> f64 {
    let m = Matrix::row(v);
    let p = m.softmax(Axis::Cols);
    let log_p = m.log_softmax(Axis::Cols);
    -p.as_slice()
        .iter()
        .zip(log_p.as_slice())
        .map(|(p, lp)| p * lp)
        .sum::<f64>()
}

/// `λ_i = exp(u_max − u_i) / Σ_k exp(u_max − u_k)`.
///
/// The common factor `exp(u_max − u_min)` cancels, so this evaluates
/// `exp(u_min − u_i)` instead: every exponent is `≤ 0` and nothing overflows
/// however far apart the entropies are.
pub fn fusion_weights(u: [f64; 3]) -> [f64; 3] {
    let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
    let e = u.map(|ui| math::exp(u_min - ui));
    let total: f64 = e.iter().sum();
    e.map(|x| x / total)
}

/// `Σ λ_i v_i`.
pub fn weighted_sum(lambda: [f64; 3], sources: [&[f64]; 3]) -> Result<alloc::vec::Vec<f64>> {
    let dim = sources[0].len();
    for s in &sources[1..] {
        if s.len() != dim {
            return Err(Error::ShapeMismatch {
                op: "weighted sum",
                left: (1, dim),
                right: (1, s.len()),
            });
        }
    }
    Ok((0..dim)
        .map(|j| lambda[0] * sources[0][j] + lambda[1] * sources[1][j] + lambda[2] * sources[2][j])
        .collect())
}

/// Nodes produced by [`record_dynamic_fuse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DynamicNodes {
    /// 3×1 entropies.
    pub u: NodeId,
    /// 1×3 weights.
    pub lambda: NodeId,
    /// 1×D fused feature.
    pub h: NodeId,
}

/// Records `u`, `λ` and `H = λ_R V_R + λ_D V_D + λ_S V_S` on the tape.
///
/// The weights are computed as `softmax(−u)`, which is the same quantity as
/// the max-shifted ratio in [`fusion_weights`].
pub fn record_dynamic_fuse(
    tape: &mut Tape<'_>,
    v_r: NodeId,
    v_d: NodeId,
    v_s: NodeId,
) -> Result<DynamicNodes> {
    let stack = tape.concat_rows(&[v_r, v_d, v_s])?;
    let p = tape.softmax(stack, Axis::Cols);
    let log_p = tape.log_softmax(stack, Axis::Cols);
    let plogp = tape.mul(p, log_p)?;
    let neg_u = tape.sum_cols(plogp);
    let u = tape.scale(neg_u, -1.0);
    let neg_u_row = tape.transpose(neg_u);
    let lambda = tape.softmax(neg_u_row, Axis::Cols);
    let h = tape.matmul(lambda, stack)?;
    Ok(DynamicNodes { u, lambda, h })
}

/// Matrix-level dynamic fusion: returns `(H, u, λ)`.
pub fn dynamic_fuse(
    v_r: &[f64],
    v_d: &[f64],
    v_s: &[f64],
) -> Result<(alloc::vec::Vec<f64>, [f64; 3], [f64; 3])> {
    let empty = ParamStore::new();
    let mut tape = Tape::new(&empty);
    let (r, d, s) = (
        tape.input(Matrix::row(v_r)),
        tape.input(Matrix::row(v_d)),
        tape.input(Matrix::row(v_s)),
    );
    let nodes = record_dynamic_fuse(&mut tape, r, d, s)?;
    let u = tape.value(nodes.u).as_slice();
    let l = tape.value(nodes.lambda).as_slice();
    Ok((
        tape.value(nodes.h).as_slice().to_vec(),
        [u[0], u[1], u[2]],
        [l[0], l[1], l[2]],
    ))
}
