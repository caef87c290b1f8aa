//! The end-to-end encoder: interaction stages, dynamic fusion and the toy
//! regression head, wired together on one tape.

use alloc::string::String;
use alloc::vec::Vec;

use super::dynamic::record_dynamic_fuse;
use super::interaction::{
    position_enhanced, rgb_depth_interaction, rgb_semantic, InteractionBlocks,
};
use super::model::FusionParams;
use crate::knowledge::{FeatureVec, Source, SpeakerPosition};
use crate::numerics::{Matrix, NodeId, Tape};
use crate::{Error, Result};

/// The four source features of one scene, all of dimension `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionBundle {
    pub rgb: FeatureVec,
    pub depth: FeatureVec,
    pub semantic: FeatureVec,
    pub position: FeatureVec,
}

impl FusionBundle {
    pub fn new(
        rgb: FeatureVec,
        depth: FeatureVec,
        semantic: FeatureVec,
        position: FeatureVec,
    ) -> Result<Self> {
        let bundle = Self {
            rgb,
            depth,
            semantic,
            position,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn dim(&self) -> usize {
        self.rgb.dim()
    }

    fn validate(&self) -> Result<()> {
        let slots = [
            (Source::Rgb, &self.rgb),
            (Source::Depth, &self.depth),
            (Source::Semantic, &self.semantic),
            (Source::Position, &self.position),
        ];
        for (expected, feature) in slots {
            if feature.source() != expected {
                return Err(Error::InvalidArgument(alloc::format!(
                    "{expected} slot holds a {} feature",
                    feature.source()
                )));
            }
            if feature.dim() != self.rgb.dim() {
                return Err(Error::ShapeMismatch {
                    op: "fusion bundle",
                    left: (1, self.rgb.dim()),
                    right: (1, feature.dim()),
                });
            }
        }
        Ok(())
    }
}

/// Fused feature with every intermediate kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionOutput {
    pub h: Vec<f64>,
    pub v_r: Vec<f64>,
    pub v_d: Vec<f64>,
    pub v_s: Vec<f64>,
    /// Entropies in nats, ordered rgb, depth, semantic.
    pub u: [f64; 3],
    /// Fusion weights, ordered rgb, depth, semantic.
    pub lambda: [f64; 3],
    pub f_r_prime: Vec<f64>,
    pub f_d_prime: Vec<f64>,
}

/// Node handles of one recorded forward pass.
#[derive(Debug, Clone, Copy)]
pub struct FusionNodes {
    pub f_r_prime: NodeId,
    pub f_d_prime: NodeId,
    pub v_r: NodeId,
    pub v_d: NodeId,
    pub v_s: NodeId,
    pub u: NodeId,
    pub lambda: NodeId,
    pub h: NodeId,
}

impl FusionNodes {
    pub fn output(&self, tape: &Tape<'_>) -> FusionOutput {
        let vec3 = |id: NodeId| {
            let s = tape.value(id).as_slice();
            [s[0], s[1], s[2]]
        };
        let row = |id: NodeId| tape.value(id).as_slice().to_vec();
        FusionOutput {
            h: row(self.h),
            v_r: row(self.v_r),
            v_d: row(self.v_d),
            v_s: row(self.v_s),
            u: vec3(self.u),
            lambda: vec3(self.lambda),
            f_r_prime: row(self.f_r_prime),
            f_d_prime: row(self.f_d_prime),
        }
    }
}

/// Records the encoder from the four source nodes to the fused feature `H`.
pub fn record_fusion(
    tape: &mut Tape<'_>,
    params: &FusionParams,
    f_r: NodeId,
    f_d: NodeId,
    f_s: NodeId,
    f_p: NodeId,
) -> Result<FusionNodes> {
    let layout = params.layout();
    let config = params.config();
    let blocks = InteractionBlocks {
        self_rgb: layout.phi_sr,
        cross_rgb: layout.phi_cr,
        self_depth: layout.phi_sd,
        cross_depth: layout.phi_cd,
    };
    let (f_r_prime, f_d_prime) =
        rgb_depth_interaction(tape, &blocks, f_r, f_d, config.swap_interaction_labels)?;
    let v_r = position_enhanced(tape, f_p, f_r_prime, layout.fc_r)?;
    let v_d = position_enhanced(tape, f_p, f_d_prime, layout.fc_d)?;
    let v_s = rgb_semantic(tape, &layout.mha_s, f_s, f_r_prime, config.heads)?;
    let fused = record_dynamic_fuse(tape, v_r, v_d, v_s)?;
    Ok(FusionNodes {
        f_r_prime,
        f_d_prime,
        v_r,
        v_d,
        v_s,
        u: fused.u,
        lambda: fused.lambda,
        h: fused.h,
    })
}

/// `ŷ = H·w + b` on the tape.
pub fn record_toy_head(tape: &mut Tape<'_>, params: &FusionParams, h: NodeId) -> Result<NodeId> {
    let (w, b) = params.layout().head;
    let (w, b) = (tape.param(w), tape.param(b));
    let y = tape.matmul(h, w)?;
    tape.add_row(y, b)
}

/// Toy regression head on a plain vector.
pub fn toy_head_forward(h: &[f64], w: &Matrix, b: f64) -> Result<f64> {
    let y = Matrix::row(h).matmul(w)?;
    y.item().map(|v| v + b).ok_or(Error::ShapeMismatch {
        op: "toy head",
        left: (1, 1),
        right: y.shape(),
    })
}

fn check_dim(params: &FusionParams, dim: usize) -> Result<()> {
    if dim != params.dim() {
        return Err(Error::ShapeMismatch {
            op: "feature dim vs model dim",
            left: (1, dim),
            right: (1, params.dim()),
        });
    }
    Ok(())
}

/// Runs the encoder on a bundle whose position feature is already computed.
pub fn fuse_pipeline(bundle: &FusionBundle, params: &FusionParams) -> Result<FusionOutput> {
    bundle.validate()?;
    check_dim(params, bundle.dim())?;
    let mut tape = Tape::new(params.store());
    let f_r = tape.input(bundle.rgb.to_matrix());
    let f_d = tape.input(bundle.depth.to_matrix());
    let f_s = tape.input(bundle.semantic.to_matrix());
    let f_p = tape.input(bundle.position.to_matrix());
    Ok(record_fusion(&mut tape, params, f_r, f_d, f_s, f_p)?.output(&tape))
}

/// One labelled scene as consumed by training and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub rgb: FeatureVec,
    pub depth: FeatureVec,
    pub semantic: FeatureVec,
    pub position: SpeakerPosition,
    pub target: f64,
}

impl Sample {
    pub fn dim(&self) -> usize {
        self.rgb.dim()
    }
}

/// Forward pass for a sample, position MLP included. `ablate` replaces the
/// named source (for position: the `F_P` feature) with zeros.
pub fn record_sample(
    tape: &mut Tape<'_>,
    params: &FusionParams,
    sample: &Sample,
    ablate: Option<Source>,
) -> Result<(FusionNodes, NodeId)> {
    let dim = sample.dim();
    check_dim(params, dim)?;
    for f in [&sample.depth, &sample.semantic] {
        check_dim(params, f.dim())?;
    }
    let zero = || Matrix::zeros(1, dim);
    let pick = |src: Source, f: &FeatureVec| {
        if ablate == Some(src) {
            zero()
        } else {
            f.to_matrix()
        }
    };
    let f_r = tape.input(pick(Source::Rgb, &sample.rgb));
    let f_d = tape.input(pick(Source::Depth, &sample.depth));
    let f_s = tape.input(pick(Source::Semantic, &sample.semantic));
    let f_p = if ablate == Some(Source::Position) {
        tape.input(zero())
    } else {
        params.layout().position.record(tape, sample.position)?
    };
    let nodes = record_fusion(tape, params, f_r, f_d, f_s, f_p)?;
    let prediction = record_toy_head(tape, params, nodes.h)?;
    Ok((nodes, prediction))
}

/// Forward pass for a sample without gradients.
pub fn fuse_sample(
    params: &FusionParams,
    sample: &Sample,
    ablate: Option<Source>,
) -> Result<(FusionOutput, f64)> {
    let mut tape = Tape::new(params.store());
    let (nodes, pred) = record_sample(&mut tape, params, sample, ablate)?;
    let y = tape.value(pred).item().expect("toy head is scalar");
    Ok((nodes.output(&tape), y))
}
