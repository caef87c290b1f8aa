//! JSON reports and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spatial_fusion_core::acoustics::{McdConfig, Rt60Config};
use spatial_fusion_core::fusion::{EvalReport, ModelConfig};

use crate::{Error, Result};

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    // Temporary files default to owner-only access; outputs should not.
    #[cfg(unix)]
    builder.permissions(std::os::unix::fs::PermissionsExt::from_mode(0o644));
    let mut tmp = builder.tempfile_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline. Field order follows the struct
/// declarations, so output is stable.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value).as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub dim: usize,
    pub bands: usize,
    pub pool: usize,
    pub heads: usize,
    pub swap_interaction_labels: bool,
}

impl From<ModelConfig> for ModelSettings {
    fn from(c: ModelConfig) -> Self {
        Self {
            dim: c.dim,
            bands: c.bands,
            pool: c.pool,
            heads: c.heads,
            swap_interaction_labels: c.swap_interaction_labels,
        }
    }
}

impl From<ModelSettings> for ModelConfig {
    fn from(s: ModelSettings) -> Self {
        Self {
            dim: s.dim,
            bands: s.bands,
            pool: s.pool,
            heads: s.heads,
            swap_interaction_labels: s.swap_interaction_labels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSettings {
    pub k: usize,
    pub dtw: bool,
    pub fit_lo: f64,
    pub fit_hi: f64,
    pub fft: usize,
    pub hop: usize,
    pub win: usize,
    pub n_mels: usize,
    pub fmin: f64,
    /// `null` means half the sample rate.
    pub fmax: Option<f64>,
}

impl MetricSettings {
    pub fn new(mcd: &McdConfig, rt60: &Rt60Config) -> Self {
        Self {
            k: mcd.k,
            dtw: mcd.use_dtw,
            fit_lo: rt60.fit_lo,
            fit_hi: rt60.fit_hi,
            fft: mcd.mel.stft.fft,
            hop: mcd.mel.stft.hop,
            win: mcd.mel.stft.win,
            n_mels: mcd.mel.n_mels,
            fmin: mcd.mel.fmin,
            fmax: mcd.mel.fmax,
        }
    }
}

/// Effective configuration of a run, echoed into every report. Settings
/// that do not apply to the command are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub model: Option<ModelSettings>,
    pub seed: Option<u64>,
    pub lr: Option<f64>,
    pub steps: Option<usize>,
    pub eps: Option<f64>,
    pub tol: Option<f64>,
    pub zero_source: Option<String>,
    pub metrics: Option<MetricSettings>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            model: None,
            seed: None,
            lr: None,
            steps: None,
            eps: None,
            tol: None,
            zero_source: None,
            metrics: None,
        }
    }

    pub fn with_model(command: &str, model: ModelConfig) -> Self {
        Self {
            model: Some(model.into()),
            ..Self::new(command)
        }
    }

    pub fn with_metrics(command: &str, metrics: MetricSettings) -> Self {
        Self {
            metrics: Some(metrics),
            ..Self::new(command)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaMean {
    pub rgb: f64,
    pub depth: f64,
    pub semantic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleErr {
    pub id: String,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalJson {
    pub mse: f64,
    pub n: usize,
    pub lambda_mean: LambdaMean,
    pub per_sample: Vec<SampleErr>,
    pub config: RunConfig,
}

impl EvalJson {
    pub fn new(r: &EvalReport, config: RunConfig) -> Self {
        let [rgb, depth, semantic] = r.lambda_mean;
        Self {
            mse: r.mse,
            n: r.n,
            lambda_mean: LambdaMean {
                rgb,
                depth,
                semantic,
            },
            per_sample: r
                .per_sample
                .iter()
                .map(|e| SampleErr {
                    id: e.id.clone(),
                    err: e.err,
                })
                .collect(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairValue {
    pub id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricJson {
    pub metric: String,
    /// Mean over `per_pair`.
    pub value: f64,
    pub per_pair: Vec<PairValue>,
    pub config: RunConfig,
}

impl MetricJson {
    pub fn new(metric: &str, per_pair: Vec<PairValue>, config: RunConfig) -> Self {
        let value = per_pair.iter().map(|p| p.value).sum::<f64>() / per_pair.len().max(1) as f64;
        Self {
            metric: metric.to_string(),
            value,
            per_pair,
            config,
        }
    }
}
