//! Command-line surface. Every command is a pure function of its flags;
//! randomness comes from `--seed` only.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spatial_fusion_core::acoustics::{
    mcd_waveforms, mel_spectrogram, rt60, rte, McdConfig, MelConfig, Rt60Config, StftConfig,
    Waveform,
};
use spatial_fusion_core::fusion::{
    evaluate, fuse_sample, pipeline_grad_check, train_toy, ModelConfig,
};
use spatial_fusion_core::knowledge::{encode_position_raw, Source, SpeakerPosition};
use spatial_fusion_core::Matrix;

use crate::manifest::{base_dir, load_samples, read_manifest, resolve, Target};
use crate::mskt::write_tensor;
use crate::params_io::{load_params, save_params};
use crate::report::{
    to_json, write_json, EvalJson, MetricJson, MetricSettings, PairValue, RunConfig,
};
use crate::wav::read_wav;
use crate::{fixtures, Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "spatial-fusion",
    version,
    about = "Multi-source spatial feature fusion and room-acoustics metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic manifest, MSKT features and decay WAVs.
    GenFixtures {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
        /// Samples that also get reference and predicted WAVs.
        #[arg(long, default_value_t = 4)]
        wav_count: usize,
    },
    /// Harmonic position encoding, or F_P when --params is given.
    EncodePosition {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        /// Band count for the raw encoding. Ignored with --params.
        #[arg(long, default_value_t = 10)]
        bands: usize,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the encoder on every manifest sample and write a JSON report.
    Fuse {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Include H, V_R, V_D, V_S, F'_R and F'_D for every sample.
        #[arg(long)]
        dump_weights: bool,
    },
    /// Check analytic gradients of the full pipeline against central differences.
    Gradcheck {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Full-batch gradient descent on the toy regression task.
    TrainToy {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        lr: f64,
        #[arg(long)]
        seed: u64,
        /// Parameter directory; `training.json` goes inside it.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Score trained parameters, optionally with one source zeroed.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum)]
        zero_source: Option<SourceArg>,
    },
    /// Reverberation time of one recording.
    Rt60 {
        #[arg(long)]
        wav: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Absolute RT60 difference for one pair or a whole manifest.
    Rte {
        #[command(flatten)]
        pairs: PairArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Mel cepstral distortion for one pair or a whole manifest.
    Mcd {
        #[command(flatten)]
        pairs: PairArgs,
        /// Compare frame by frame over the shorter length instead of aligning.
        #[arg(long)]
        no_dtw: bool,
        #[arg(long, default_value_t = 13)]
        k: usize,
        #[command(flatten)]
        mel: MelArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Mel spectrogram (frames × n_mels) as an MSKT file.
    Melspec {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        mel: MelArgs,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 10)]
    pub bands: usize,
    #[arg(long, default_value_t = 16)]
    pub pool: usize,
    #[arg(long, default_value_t = 4)]
    pub heads: usize,
    #[arg(long)]
    pub swap_interaction_labels: bool,
}

impl ModelArgs {
    fn config(self, dim: usize) -> ModelConfig {
        ModelConfig {
            dim,
            bands: self.bands,
            pool: self.pool,
            heads: self.heads,
            swap_interaction_labels: self.swap_interaction_labels,
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct FitArgs {
    /// Upper (less negative) end of the decay fit, dB.
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub fit_lo: f64,
    /// Lower end of the decay fit, dB.
    #[arg(long, default_value_t = -25.0, allow_hyphen_values = true)]
    pub fit_hi: f64,
}

impl From<FitArgs> for Rt60Config {
    fn from(a: FitArgs) -> Self {
        Rt60Config {
            fit_lo: a.fit_lo,
            fit_hi: a.fit_hi,
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct MelArgs {
    #[arg(long, default_value_t = 1024)]
    pub fft: usize,
    #[arg(long, default_value_t = 256)]
    pub hop: usize,
    #[arg(long, default_value_t = 1024)]
    pub win: usize,
    #[arg(long, default_value_t = 80)]
    pub n_mels: usize,
    #[arg(long, default_value_t = 0.0)]
    pub fmin: f64,
    /// Defaults to half the sample rate.
    #[arg(long)]
    pub fmax: Option<f64>,
}

impl From<MelArgs> for MelConfig {
    fn from(a: MelArgs) -> Self {
        MelConfig {
            stft: StftConfig {
                fft: a.fft,
                hop: a.hop,
                win: a.win,
            },
            n_mels: a.n_mels,
            fmin: a.fmin,
            fmax: a.fmax,
        }
    }
}

/// Either `--pred A --target B`, or `--manifest M --pred-dir P` where every
/// record with a WAV target is paired with `P/<id>.wav`.
#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[arg(long, requires = "target", conflicts_with_all = ["manifest", "pred_dir"], required_unless_present = "manifest")]
    pub pred: Option<PathBuf>,
    #[arg(long, requires = "pred")]
    pub target: Option<PathBuf>,
    #[arg(long, requires = "pred_dir")]
    pub manifest: Option<PathBuf>,
    #[arg(long, requires = "manifest")]
    pub pred_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Rgb,
    Depth,
    Semantic,
    Position,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Rgb => Source::Rgb,
            SourceArg::Depth => Source::Depth,
            SourceArg::Semantic => Source::Semantic,
            SourceArg::Position => Source::Position,
        }
    }
}

/// Runs one parsed command. Reports that are not written to a file go to
/// stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenFixtures {
            seed,
            count,
            dim,
            out,
            wav_count,
        } => {
            let report = fixtures::generate(&out, seed, count, dim, wav_count)?;
            print!("{}", to_json(&report));
            Ok(())
        }
        Command::EncodePosition {
            x,
            y,
            bands,
            params,
            out,
        } => encode_position(x, y, bands, params.as_deref(), &out),
        Command::Fuse {
            manifest,
            params,
            out,
            dump_weights,
        } => fuse(&manifest, &params, &out, dump_weights),
        Command::Gradcheck {
            seed,
            dim,
            eps,
            tol,
            model,
            report,
        } => gradcheck(seed, model.config(dim), eps, tol, report.as_deref()),
        Command::TrainToy {
            manifest,
            steps,
            lr,
            seed,
            out,
            model,
        } => train(&manifest, steps, lr, seed, &out, model),
        Command::Eval {
            manifest,
            params,
            report,
            zero_source,
        } => eval(&manifest, &params, &report, zero_source.map(Source::from)),
        Command::Rt60 { wav, fit, report } => {
            let cfg = Rt60Config::from(fit);
            let value = rt60(&read_wav(&wav)?, &cfg)?;
            let per_pair = vec![PairValue {
                id: wav.display().to_string(),
                value,
            }];
            let settings = MetricSettings::new(&McdConfig::default(), &cfg);
            emit(
                &MetricJson::new("rt60", per_pair, RunConfig::with_metrics("rt60", settings)),
                report.as_deref(),
            )
        }
        Command::Rte { pairs, fit, report } => {
            let cfg = Rt60Config::from(fit);
            let per_pair = each_pair(&pairs, |p, t| Ok(rte(p, t, &cfg)?))?;
            let settings = MetricSettings::new(&McdConfig::default(), &cfg);
            emit(
                &MetricJson::new("rte", per_pair, RunConfig::with_metrics("rte", settings)),
                report.as_deref(),
            )
        }
        Command::Mcd {
            pairs,
            no_dtw,
            k,
            mel,
            report,
        } => {
            let cfg = McdConfig {
                mel: mel.into(),
                k,
                use_dtw: !no_dtw,
            };
            let per_pair = each_pair(&pairs, |p, t| Ok(mcd_waveforms(p, t, &cfg)?))?;
            let settings = MetricSettings::new(&cfg, &Rt60Config::default());
            emit(
                &MetricJson::new("mcd", per_pair, RunConfig::with_metrics("mcd", settings)),
                report.as_deref(),
            )
        }
        Command::Melspec { wav, out, mel } => {
            let m = mel_spectrogram(&read_wav(&wav)?, &mel.into())?;
            let matrix = Matrix::from_vec(m.frames, m.n_mels, m.values)?;
            write_tensor(&out, &matrix)
        }
    }
}

fn emit<T: Serialize>(report: &T, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_json(p, report),
        None => {
            print!("{}", to_json(report));
            Ok(())
        }
    }
}

fn each_pair<F>(pairs: &PairArgs, mut metric: F) -> Result<Vec<PairValue>>
where
    F: FnMut(&Waveform, &Waveform) -> Result<f64>,
{
    if let (Some(pred), Some(target)) = (&pairs.pred, &pairs.target) {
        let value = metric(&read_wav(pred)?, &read_wav(target)?)?;
        return Ok(vec![PairValue {
            id: pred.display().to_string(),
            value,
        }]);
    }
    let (Some(manifest), Some(pred_dir)) = (&pairs.manifest, &pairs.pred_dir) else {
        unreachable!("clap enforces one of the two pairings");
    };
    let base = base_dir(manifest);
    let mut out = Vec::new();
    for r in read_manifest(manifest)? {
        let Target::Audio(target) = &r.target else {
            continue;
        };
        let pred = read_wav(&pred_dir.join(format!("{}.wav", r.id)))?;
        let target = read_wav(&resolve(&base, target))?;
        let value = metric(&pred, &target).map_err(|e| Error::Invalid(format!("{}: {e}", r.id)))?;
        out.push(PairValue { id: r.id, value });
    }
    if out.is_empty() {
        return Err(Error::Invalid(format!(
            "{}: no records with a WAV target",
            manifest.display()
        )));
    }
    Ok(out)
}

fn encode_position(x: f64, y: f64, bands: usize, params: Option<&Path>, out: &Path) -> Result<()> {
    let pos = SpeakerPosition::new(x, y)?;
    let values = match params {
        None => encode_position_raw(pos, bands)?,
        Some(dir) => {
            let p = load_params(dir)?;
            p.layout()
                .position
                .features(p.store(), pos)?
                .values()
                .to_vec()
        }
    };
    write_tensor(out, &Matrix::row(&values))
}

#[derive(Debug, Serialize)]
struct FusedSample {
    id: String,
    prediction: f64,
    u: [f64; 3],
    lambda: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    vectors: Option<FusedVectors>,
}

#[derive(Debug, Serialize)]
struct FusedVectors {
    h: Vec<f64>,
    v_r: Vec<f64>,
    v_d: Vec<f64>,
    v_s: Vec<f64>,
    f_r_prime: Vec<f64>,
    f_d_prime: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct FuseJson {
    n: usize,
    per_sample: Vec<FusedSample>,
    config: RunConfig,
}

fn fuse(manifest: &Path, params_dir: &Path, out: &Path, dump: bool) -> Result<()> {
    let params = load_params(params_dir)?;
    let samples = load_samples(manifest, false)?;
    let mut per_sample = Vec::with_capacity(samples.len());
    for s in &samples {
        let (o, prediction) = fuse_sample(&params, s, None)?;
        let vectors = dump.then(|| FusedVectors {
            h: o.h.clone(),
            v_r: o.v_r.clone(),
            v_d: o.v_d.clone(),
            v_s: o.v_s.clone(),
            f_r_prime: o.f_r_prime.clone(),
            f_d_prime: o.f_d_prime.clone(),
        });
        per_sample.push(FusedSample {
            id: s.id.clone(),
            prediction,
            u: o.u,
            lambda: o.lambda,
            vectors,
        });
    }
    let config = RunConfig::with_model("fuse", *params.config());
    write_json(
        out,
        &FuseJson {
            n: per_sample.len(),
            per_sample,
            config,
        },
    )
}

#[derive(Debug, Serialize)]
struct GradcheckJson {
    max_rel_err: f64,
    passed: bool,
    worst_param: String,
    worst_index: usize,
    analytic: f64,
    numeric: f64,
    coordinates: usize,
    config: RunConfig,
}

fn gradcheck(
    seed: u64,
    model: ModelConfig,
    eps: f64,
    tol: f64,
    report: Option<&Path>,
) -> Result<()> {
    let r = pipeline_grad_check(model, seed, eps)?;
    let json = GradcheckJson {
        max_rel_err: r.max_rel_err,
        passed: r.passes(tol),
        worst_param: r.worst_param.clone(),
        worst_index: r.worst_index,
        analytic: r.analytic,
        numeric: r.numeric,
        coordinates: r.coordinates,
        config: RunConfig {
            seed: Some(seed),
            eps: Some(eps),
            tol: Some(tol),
            ..RunConfig::with_model("gradcheck", model)
        },
    };
    emit(&json, report)?;
    if !json.passed {
        return Err(Error::Invalid(format!(
            "max relative error {:e} exceeds tolerance {tol:e}",
            r.max_rel_err
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TrainingJson {
    initial_loss: f64,
    final_loss: f64,
    losses: Vec<f64>,
    config: RunConfig,
}

fn train(
    manifest: &Path,
    steps: usize,
    lr: f64,
    seed: u64,
    out: &Path,
    model: ModelArgs,
) -> Result<()> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::Invalid(format!(
            "learning rate must be finite and non-negative, got {lr}"
        )));
    }
    let samples = load_samples(manifest, true)?;
    let dim = samples
        .first()
        .map(|s| s.dim())
        .ok_or_else(|| Error::from(spatial_fusion_core::Error::EmptyInput("training manifest")))?;
    let config = model.config(dim);
    let outcome = train_toy(&samples, config, steps, lr, seed)?;
    save_params(out, &outcome.params)?;
    let json = TrainingJson {
        initial_loss: outcome.losses[0],
        final_loss: outcome.final_loss,
        losses: outcome.losses,
        config: RunConfig {
            seed: Some(seed),
            lr: Some(lr),
            steps: Some(steps),
            ..RunConfig::with_model("train-toy", config)
        },
    };
    write_json(&out.join("training.json"), &json)
}

fn eval(manifest: &Path, params_dir: &Path, report: &Path, ablate: Option<Source>) -> Result<()> {
    let params = load_params(params_dir)?;
    let samples = load_samples(manifest, true)?;
    let r = evaluate(&samples, &params, ablate)?;
    let config = RunConfig {
        zero_source: ablate.map(|s| s.to_string()),
        ..RunConfig::with_model("eval", *params.config())
    };
    write_json(report, &EvalJson::new(&r, config))
}
