//! Dominant-supplement interaction, entropy-weighted dynamic fusion and the
//! toy regression head used for training and ablation studies.

pub mod dynamic;
pub mod interaction;
mod model;
pub mod pipeline;
pub mod reference;
pub mod train;

pub use dynamic::{dynamic_fuse, entropy, fusion_weights, weighted_sum};
pub use model::{registry, FusionParams, Layout, ModelConfig};
pub use pipeline::{
    fuse_pipeline, fuse_sample, toy_head_forward, FusionBundle, FusionOutput, Sample,
};
pub use train::{
    evaluate, mse_and_grad, pipeline_grad_check, synth_samples, train_toy, EvalReport, SampleError,
    TrainOutcome,
};
