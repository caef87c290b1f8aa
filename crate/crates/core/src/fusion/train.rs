//! Full-batch training of the toy head, source-ablation evaluation, and the
//! end-to-end gradient check.

use alloc::string::String;
use alloc::vec::Vec;

use super::model::{FusionParams, ModelConfig};
use super::pipeline::{fuse_sample, record_sample, Sample};
use super::reference::reference_squared_error;
use crate::knowledge::{synth_sample, FeatureVec, Source};
use crate::numerics::{
    grad_check_extended, sgd_step, GradCheckReport, Matrix, ParamStore, Rng, Tape,
};
use crate::{Error, Result};

/// Mean squared error over `samples` and its gradient.
pub fn mse_and_grad(params: &FusionParams, samples: &[Sample]) -> Result<(f64, ParamStore)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("training samples"));
    }
    let n = samples.len() as f64;
    let mut total = 0.0;
    let mut grads = params.store().zeros_like();
    for sample in samples {
        let mut tape = Tape::new(params.store());
        let (_, pred) = record_sample(&mut tape, params, sample, None)?;
        let target = tape.input(Matrix::scalar(sample.target));
        let residual = tape.sub(pred, target)?;
        let sq = tape.square(residual);
        let loss = tape.scale(sq, 1.0 / n);
        total += tape.value(loss).item().expect("scalar loss");
        grads.axpy(1.0, tape.backward(loss)?.params())?;
    }
    Ok((total, grads))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: FusionParams,
    /// Loss before each update.
    pub losses: Vec<f64>,
    /// Loss after the last update.
    pub final_loss: f64,
}

/// Plain full-batch gradient descent on the squared error of the toy head.
/// Parameters are initialized from `seed`; nothing else is random.
pub fn train_toy(
    samples: &[Sample],
    config: ModelConfig,
    steps: usize,
    lr: f64,
    seed: u64,
) -> Result<TrainOutcome> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("training manifest"));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "training needs at least one step".into(),
        ));
    }
    let mut params = FusionParams::init(config, &mut Rng::new(seed))?;
    let mut losses = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (loss, grads) = mse_and_grad(&params, samples)?;
        losses.push(loss);
        sgd_step(params.store_mut(), &grads, lr)?;
    }
    let final_loss = mse_and_grad(&params, samples)?.0;
    Ok(TrainOutcome {
        params,
        losses,
        final_loss,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleError {
    pub id: String,
    /// Squared error of the prediction.
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mse: f64,
    pub n: usize,
    /// Mean fusion weights, ordered rgb, depth, semantic.
    pub lambda_mean: [f64; 3],
    pub per_sample: Vec<SampleError>,
}

/// Scores `params` on `samples`, optionally zeroing one source first.
pub fn evaluate(
    samples: &[Sample],
    params: &FusionParams,
    ablate: Option<Source>,
) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("evaluation manifest"));
    }
    let mut per_sample = Vec::with_capacity(samples.len());
    let mut lambda_sum = [0.0; 3];
    for s in samples {
        let (out, pred) = fuse_sample(params, s, ablate)?;
        for (acc, l) in lambda_sum.iter_mut().zip(out.lambda) {
            *acc += l;
        }
        let r = pred - s.target;
        per_sample.push(SampleError {
            id: s.id.clone(),
            err: r * r,
        });
    }
    let n = samples.len();
    Ok(EvalReport {
        mse: per_sample.iter().map(|e| e.err).sum::<f64>() / n as f64,
        n,
        lambda_mean: lambda_sum.map(|v| v / n as f64),
        per_sample,
    })
}

/// Synthetic labelled samples with ids `sample-0000`, `sample-0001`, ...
pub fn synth_samples(rng: &mut Rng, count: usize, dim: usize) -> Result<Vec<Sample>> {
    (0..count)
        .map(|i| {
            let s = synth_sample(rng, dim)?;
            Ok(Sample {
                id: alloc::format!("sample-{i:04}"),
                rgb: FeatureVec::new(Source::Rgb, s.rgb)?,
                depth: FeatureVec::new(Source::Depth, s.depth)?,
                semantic: FeatureVec::new(Source::Semantic, s.semantic)?,
                position: s.position,
                target: s.target,
            })
        })
        .collect()
}

/// Checks the analytic gradient of the squared toy-head error on one
/// synthetic sample against central differences, over every parameter. The
/// differences come from the double-double reference forward pass.
/// Parameters come first from the `seed` stream, the sample after.
pub fn pipeline_grad_check(config: ModelConfig, seed: u64, eps: f64) -> Result<GradCheckReport> {
    let mut rng = Rng::new(seed);
    let params = FusionParams::init(config, &mut rng)?;
    let samples = synth_samples(&mut rng, 1, config.dim)?;
    let (_, analytic) = mse_and_grad(&params, &samples)?;
    let loss = |store: &ParamStore| {
        let probe = FusionParams::from_store(config, store.clone()).expect("same registry");
        reference_squared_error(&probe, &samples[0]).expect("forward pass")
    };
    grad_check_extended(loss, params.store(), &analytic, eps)
}
