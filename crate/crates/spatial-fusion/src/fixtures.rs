//! Deterministic fixture sets: synthetic features with toy targets, and
//! decaying-noise recordings for the acoustic metrics.
//!
//! Layout under the output directory:
//!
//! ```text
//! manifest.json          numeric toy targets
//! features/<id>_{rgb,depth,semantic}.mskt
//! audio_manifest.json    same features, target = audio/<id>.wav
//! audio/<id>.wav         reference decay
//! pred/<id>.wav          "predicted" decay with a perturbed T60
//! fixtures.json          what was generated and from which settings
//! ```

use std::path::{Path, PathBuf};

use serde::Serialize;
use spatial_fusion_core::acoustics::synth_decay;
use spatial_fusion_core::knowledge::{synth_sample, toy_target, SpeakerPosition};
use spatial_fusion_core::{Matrix, Rng};

use crate::manifest::{serialize_manifest, SampleRecord, Target};
use crate::mskt::write_tensor;
use crate::report::{write_atomic, write_json};
use crate::wav::write_wav;
use crate::{Error, Result};

pub const SAMPLE_RATE: u32 = 16_000;
/// Reference decay times are drawn from this range.
pub const T60_RANGE: (f64, f64) = (0.3, 1.0);
/// Predicted decay time = reference × a factor from this range.
pub const PRED_FACTOR: (f64, f64) = (0.8, 1.2);
pub const WAV_SECONDS: f64 = 1.5;
pub const MANIFEST: &str = "manifest.json";
pub const AUDIO_MANIFEST: &str = "audio_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureSettings {
    pub seed: u64,
    pub count: usize,
    pub dim: usize,
    pub wav_count: usize,
    pub sample_rate: u32,
    pub wav_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WavFixture {
    pub id: String,
    pub target_t60: f64,
    pub pred_t60: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureReport {
    /// Relative to the output directory, like every path inside it.
    pub manifest: PathBuf,
    pub audio_manifest: PathBuf,
    pub samples: usize,
    pub wavs: Vec<WavFixture>,
    pub config: FixtureSettings,
}

fn round_f32(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x as f32 as f64).collect()
}

/// Features are rounded to 32-bit precision before the target is computed,
/// so targets agree exactly with what a loader reads back.
pub fn generate(
    out: &Path,
    seed: u64,
    count: usize,
    dim: usize,
    wav_count: usize,
) -> Result<FixtureReport> {
    if count == 0 {
        return Err(Error::Invalid("fixture count must be positive".into()));
    }
    if wav_count > count {
        return Err(Error::Invalid(format!(
            "wav count {wav_count} exceeds sample count {count}"
        )));
    }
    for sub in ["features", "audio", "pred"] {
        let d = out.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let mut rng = Rng::new(seed);
    let mut audio_rng = rng.fork();
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let id = format!("sample-{i:04}");
        let s = synth_sample(&mut rng, dim)?;
        let (rgb, depth, semantic) = (round_f32(s.rgb), round_f32(s.depth), round_f32(s.semantic));
        let target = toy_target(&rgb, &depth, &semantic, s.position);
        let feat = |tag: &str, v: &[f64]| -> Result<PathBuf> {
            let rel = PathBuf::from(format!("features/{id}_{tag}.mskt"));
            write_tensor(&out.join(&rel), &Matrix::row(v))?;
            Ok(rel)
        };
        records.push(SampleRecord {
            id: id.clone(),
            rgb_feat: feat("rgb", &rgb)?,
            depth_feat: feat("depth", &depth)?,
            semantic_feat: feat("semantic", &semantic)?,
            speaker_xy: xy(s.position),
            target: Target::Number(target),
        });
    }

    let mut wavs = Vec::with_capacity(wav_count);
    let mut audio_records = Vec::with_capacity(wav_count);
    for r in records.iter().take(wav_count) {
        let target_t60 = audio_rng.uniform(T60_RANGE.0, T60_RANGE.1);
        let pred_t60 = target_t60 * audio_rng.uniform(PRED_FACTOR.0, PRED_FACTOR.1);
        let reference = synth_decay(&mut audio_rng, target_t60, SAMPLE_RATE, WAV_SECONDS)?;
        let predicted = synth_decay(&mut audio_rng, pred_t60, SAMPLE_RATE, WAV_SECONDS)?;
        let rel = PathBuf::from(format!("audio/{}.wav", r.id));
        write_wav(&out.join(&rel), &reference)?;
        write_wav(&out.join(format!("pred/{}.wav", r.id)), &predicted)?;
        audio_records.push(SampleRecord {
            target: Target::Audio(rel),
            ..r.clone()
        });
        wavs.push(WavFixture {
            id: r.id.clone(),
            target_t60,
            pred_t60,
        });
    }

    write_atomic(&out.join(MANIFEST), serialize_manifest(&records).as_bytes())?;
    write_atomic(
        &out.join(AUDIO_MANIFEST),
        serialize_manifest(&audio_records).as_bytes(),
    )?;
    let report = FixtureReport {
        manifest: MANIFEST.into(),
        audio_manifest: AUDIO_MANIFEST.into(),
        samples: count,
        wavs,
        config: FixtureSettings {
            seed,
            count,
            dim,
            wav_count,
            sample_rate: SAMPLE_RATE,
            wav_seconds: WAV_SECONDS,
        },
    };
    write_json(&out.join("fixtures.json"), &report)?;
    Ok(report)
}

fn xy(p: SpeakerPosition) -> [f64; 2] {
    [p.x(), p.y()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::load_samples;

    #[test]
    fn loaded_targets_match_features() {
        let dir = tempfile::tempdir().unwrap();
        let rep = generate(dir.path(), 5, 6, 8, 2).unwrap();
        let samples = load_samples(&dir.path().join(rep.manifest), true).unwrap();
        assert_eq!(samples.len(), 6);
        for s in &samples {
            let t = toy_target(
                s.rgb.values(),
                s.depth.values(),
                s.semantic.values(),
                s.position,
            );
            assert_eq!(t, s.target);
        }
        assert_eq!(
            load_samples(&dir.path().join(&rep.audio_manifest), false)
                .unwrap()
                .len(),
            2
        );
        assert!(load_samples(&dir.path().join(&rep.audio_manifest), true).is_err());
    }

    #[test]
    fn wav_count_bounded_by_count() {
        let dir = tempfile::tempdir().unwrap();
        assert!(generate(dir.path(), 1, 2, 8, 3).is_err());
        assert!(generate(dir.path(), 1, 0, 8, 0).is_err());
    }
}
