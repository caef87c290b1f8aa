//! Dominant-supplement interaction stages, recorded on a tape.

use crate::numerics::{multi_head_attention, AttentionBlock, Axis, NodeId, Tape};
use crate::{Error, Result};

fn check_same_shape(tape: &Tape<'_>, a: NodeId, b: NodeId, op: &'static str) -> Result<()> {
    let (sa, sb) = (tape.value(a).shape(), tape.value(b).shape());
    if sa != sb {
        return Err(Error::ShapeMismatch {
            op,
            left: sa,
            right: sb,
        });
    }
    Ok(())
}

/// The four single-head attention blocks of the RGB-depth interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractionBlocks {
    pub self_rgb: AttentionBlock,
    pub cross_rgb: AttentionBlock,
    pub self_depth: AttentionBlock,
    pub cross_depth: AttentionBlock,
}

/// RGB-depth interaction. Returns `(F'_R, F'_D)`.
///
/// With `swap_labels == false` the assignment is taken literally:
///
/// ```text
/// F'_D = F_R + Φ_sr(F_R, F_R, F_R) + Φ_cr(F_R, F_D, F_D)
/// F'_R = F_D + Φ_sd(F_D, F_D, F_D) + Φ_cd(F_D, F_R, F_R)
/// ```
///
/// `swap_labels == true` exchanges the two names, so the RGB-rooted sum is
/// returned as `F'_R`.
pub fn rgb_depth_interaction(
    tape: &mut Tape<'_>,
    blocks: &InteractionBlocks,
    f_r: NodeId,
    f_d: NodeId,
    swap_labels: bool,
) -> Result<(NodeId, NodeId)> {
    check_same_shape(tape, f_r, f_d, "rgb-depth interaction")?;
    let rgb_rooted = {
        let s = multi_head_attention(tape, &blocks.self_rgb, f_r, f_r, 1)?;
        let c = multi_head_attention(tape, &blocks.cross_rgb, f_r, f_d, 1)?;
        let acc = tape.add(f_r, s)?;
        tape.add(acc, c)?
    };
    let depth_rooted = {
        let s = multi_head_attention(tape, &blocks.self_depth, f_d, f_d, 1)?;
        let c = multi_head_attention(tape, &blocks.cross_depth, f_d, f_r, 1)?;
        let acc = tape.add(f_d, s)?;
        tape.add(acc, c)?
    };
    if swap_labels {
        Ok((rgb_rooted, depth_rooted))
    } else {
        Ok((depth_rooted, rgb_rooted))
    }
}

/// Position-related visual features `P` for a visual feature `f_v`:
/// `S = softmax_over_rows(F_Pᵀ F_v)`, `P = F_v S`.
///
/// Each column of `S` is a distribution over the entries of `f_v`, so every
/// `P_j` is a convex combination of `f_v`.
pub fn position_attention(tape: &mut Tape<'_>, f_p: NodeId, f_v: NodeId) -> Result<NodeId> {
    check_same_shape(tape, f_p, f_v, "position attention")?;
    let fp_t = tape.transpose(f_p);
    let scores = tape.matmul(fp_t, f_v)?;
    let weights = tape.softmax(scores, Axis::Rows);
    tape.matmul(f_v, weights)
}

/// Speaker-position enhanced feature:
/// `V = softmax(concat[f_v, P] · W + b)` over the `D` outputs.
pub fn position_enhanced(
    tape: &mut Tape<'_>,
    f_p: NodeId,
    f_v: NodeId,
    fc: (usize, usize),
) -> Result<NodeId> {
    let p = position_attention(tape, f_p, f_v)?;
    let joined = tape.concat_cols(&[f_v, p])?;
    let w = tape.param(fc.0);
    let b = tape.param(fc.1);
    let logits = tape.matmul(joined, w)?;
    let logits = tape.add_row(logits, b)?;
    Ok(tape.softmax(logits, Axis::Cols))
}

/// Semantic refinement: multi-head attention with the semantic feature as
/// query and `F'_R` as keys and values.
pub fn rgb_semantic(
    tape: &mut Tape<'_>,
    block: &AttentionBlock,
    f_s: NodeId,
    f_r_prime: NodeId,
    heads: usize,
) -> Result<NodeId> {
    check_same_shape(tape, f_s, f_r_prime, "rgb-semantic interaction")?;
    multi_head_attention(tape, block, f_s, f_r_prime, heads)
}
