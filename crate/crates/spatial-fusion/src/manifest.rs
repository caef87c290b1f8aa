//! Sample manifests: a JSON array of
//! `{"id", "rgb_feat", "depth_feat", "semantic_feat", "speaker_xy", "target"}`.
//! Feature paths are relative to the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use spatial_fusion_core::fusion::Sample;
use spatial_fusion_core::knowledge::{FeatureVec, Source, SpeakerPosition};

use crate::mskt::read_tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Target {
    Number(f64),
    Audio(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub id: String,
    pub rgb_feat: PathBuf,
    pub depth_feat: PathBuf,
    pub semantic_feat: PathBuf,
    pub speaker_xy: [f64; 2],
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest is not valid JSON: {0}")]
    Syntax(String),
    #[error("manifest must be a JSON array of objects")]
    NotAnArray,
    #[error("{id}: entry is not an object")]
    NotAnObject { id: String },
    #[error("{id}: missing field `{field}`")]
    MissingField { id: String, field: &'static str },
    #[error("{id}: field `{field}` must be {expected}")]
    WrongType {
        id: String,
        field: &'static str,
        expected: &'static str,
    },
    #[error("{id}: speaker_xy ({x}, {y}) is outside [0, 1]")]
    OutOfRange { id: String, x: f64, y: f64 },
    #[error("{id}: duplicate id")]
    DuplicateId { id: String },
}

const FIELDS: [&str; 6] = [
    "id",
    "rgb_feat",
    "depth_feat",
    "semantic_feat",
    "speaker_xy",
    "target",
];

pub fn parse_manifest(text: &str) -> Result<Vec<SampleRecord>, ManifestError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ManifestError::Syntax(e.to_string()))?;
    let entries = value.as_array().ok_or(ManifestError::NotAnArray)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let record = parse_record(i, entry)?;
        if !seen.insert(record.id.clone()) {
            return Err(ManifestError::DuplicateId { id: record.id });
        }
        out.push(record);
    }
    Ok(out)
}

fn parse_record(index: usize, entry: &Value) -> Result<SampleRecord, ManifestError> {
    let fallback = format!("entry {index}");
    let Some(obj) = entry.as_object() else {
        return Err(ManifestError::NotAnObject { id: fallback });
    };
    let id = match obj.get("id") {
        None => {
            return Err(ManifestError::MissingField {
                id: fallback,
                field: "id",
            })
        }
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            return Err(ManifestError::WrongType {
                id: fallback,
                field: "id",
                expected: "a string",
            })
        }
    };
    for field in FIELDS {
        if !obj.contains_key(field) {
            return Err(ManifestError::MissingField { id, field });
        }
    }
    let path = |field: &'static str| match &obj[field] {
        Value::String(s) if !s.is_empty() => Ok(PathBuf::from(s)),
        _ => Err(ManifestError::WrongType {
            id: id.clone(),
            field,
            expected: "a non-empty path string",
        }),
    };
    let rgb_feat = path("rgb_feat")?;
    let depth_feat = path("depth_feat")?;
    let semantic_feat = path("semantic_feat")?;
    let speaker_xy = speaker_xy(&id, obj)?;
    let target = match &obj["target"] {
        Value::Number(n) => Target::Number(n.as_f64().expect("serde_json numbers are finite")),
        Value::String(s) if !s.is_empty() => Target::Audio(PathBuf::from(s)),
        _ => {
            return Err(ManifestError::WrongType {
                id,
                field: "target",
                expected: "a number or a WAV path",
            });
        }
    };
    Ok(SampleRecord {
        id,
        rgb_feat,
        depth_feat,
        semantic_feat,
        speaker_xy,
        target,
    })
}

fn speaker_xy(id: &str, obj: &Map<String, Value>) -> Result<[f64; 2], ManifestError> {
    let wrong = || ManifestError::WrongType {
        id: id.to_string(),
        field: "speaker_xy",
        expected: "an [x, y] number pair",
    };
    let pair = obj["speaker_xy"]
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(wrong)?;
    let x = pair[0].as_f64().ok_or_else(wrong)?;
    let y = pair[1].as_f64().ok_or_else(wrong)?;
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(ManifestError::OutOfRange {
            id: id.to_string(),
            x,
            y,
        });
    }
    Ok([x, y])
}

pub fn serialize_manifest(records: &[SampleRecord]) -> String {
    crate::report::to_json(&records)
}

pub fn read_manifest(path: &Path) -> Result<Vec<SampleRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_manifest(&text)?)
}

/// Directory that relative paths in the manifest at `path` resolve against.
pub fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_feature(base: &Path, p: &Path, source: Source) -> Result<FeatureVec> {
    let path = resolve(base, p);
    let m = read_tensor(&path)?;
    if m.rows() != 1 {
        return Err(Error::Invalid(format!(
            "{}: feature must be a 1xD row, got {}x{}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(FeatureVec::from_matrix(source, &m)?)
}

/// Loads every record's features. All must share one dimension.
pub fn load_samples(manifest: &Path, require_numeric: bool) -> Result<Vec<Sample>> {
    let base = base_dir(manifest);
    let records = read_manifest(manifest)?;
    let mut out: Vec<Sample> = Vec::with_capacity(records.len());
    for r in records {
        let rgb = load_feature(&base, &r.rgb_feat, Source::Rgb)?;
        let depth = load_feature(&base, &r.depth_feat, Source::Depth)?;
        let semantic = load_feature(&base, &r.semantic_feat, Source::Semantic)?;
        let dim = out.first().map_or(rgb.dim(), Sample::dim);
        for f in [&rgb, &depth, &semantic] {
            if f.dim() != dim {
                return Err(Error::Invalid(format!(
                    "{}: {} feature has dim {}, expected {dim}",
                    r.id,
                    f.source(),
                    f.dim()
                )));
            }
        }
        let target = match r.target {
            Target::Number(t) => t,
            Target::Audio(_) if require_numeric => {
                return Err(Error::Invalid(format!(
                    "{}: target must be a number for this command",
                    r.id
                )));
            }
            Target::Audio(_) => f64::NAN,
        };
        let [x, y] = r.speaker_xy;
        out.push(Sample {
            id: r.id,
            rgb,
            depth,
            semantic,
            position: SpeakerPosition::new(x, y)?,
            target,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"[{"id": "a", "rgb_feat": "f/a_rgb.mskt", "depth_feat": "f/a_depth.mskt",
        "semantic_feat": "f/a_sem.mskt", "speaker_xy": [0.25, 0.5], "target": 0.125}]"#;

    #[test]
    fn minimal_entry() {
        let r = parse_manifest(ONE).unwrap();
        assert_eq!(
            r,
            vec![SampleRecord {
                id: "a".into(),
                rgb_feat: "f/a_rgb.mskt".into(),
                depth_feat: "f/a_depth.mskt".into(),
                semantic_feat: "f/a_sem.mskt".into(),
                speaker_xy: [0.25, 0.5],
                target: Target::Number(0.125),
            }]
        );
    }

    #[test]
    fn empty_array_is_empty() {
        assert_eq!(parse_manifest("[]").unwrap(), vec![]);
        assert_eq!(parse_manifest(" [ ]\n").unwrap(), vec![]);
    }

    #[test]
    fn out_of_range_names_the_id() {
        let text = ONE.replace("[0.25, 0.5]", "[1.5, 0.2]");
        let err = parse_manifest(&text).unwrap_err();
        assert_eq!(
            err,
            ManifestError::OutOfRange {
                id: "a".into(),
                x: 1.5,
                y: 0.2
            }
        );
        assert!(err.to_string().starts_with("a:"));
    }

    #[test]
    fn missing_field_names_the_id() {
        let text = ONE.replace(r#""target": 0.125"#, r#""extra": 1"#);
        assert_eq!(
            parse_manifest(&text).unwrap_err(),
            ManifestError::MissingField {
                id: "a".into(),
                field: "target"
            }
        );
        assert_eq!(
            parse_manifest(r#"[{"rgb_feat": "x"}]"#).unwrap_err(),
            ManifestError::MissingField {
                id: "entry 0".into(),
                field: "id"
            }
        );
    }

    #[test]
    fn duplicate_ids() {
        let entry = &ONE[1..ONE.len() - 1];
        let text = format!("[{entry}, {entry}]");
        assert_eq!(
            parse_manifest(&text).unwrap_err(),
            ManifestError::DuplicateId { id: "a".into() }
        );
    }

    #[test]
    fn syntax_and_shape_errors() {
        assert!(matches!(
            parse_manifest("[{"),
            Err(ManifestError::Syntax(_))
        ));
        assert_eq!(parse_manifest("{}"), Err(ManifestError::NotAnArray));
        assert!(matches!(
            parse_manifest("[3]"),
            Err(ManifestError::NotAnObject { .. })
        ));
        let text = ONE.replace("[0.25, 0.5]", "[0.25]");
        assert!(matches!(
            parse_manifest(&text),
            Err(ManifestError::WrongType {
                field: "speaker_xy",
                ..
            })
        ));
    }

    #[test]
    fn audio_target() {
        let text = ONE.replace("0.125", r#""audio/a.wav""#);
        assert_eq!(
            parse_manifest(&text).unwrap()[0].target,
            Target::Audio("audio/a.wav".into())
        );
    }

    #[test]
    fn serialize_is_a_fixed_point() {
        let text = ONE.replace("[0.25, 0.5]", "[0.1, 0.30000000000000004]");
        let first = parse_manifest(&text).unwrap();
        let out = serialize_manifest(&first);
        assert_eq!(parse_manifest(&out).unwrap(), first);
        assert_eq!(serialize_manifest(&parse_manifest(&out).unwrap()), out);
    }

    #[test]
    fn coordinates_and_targets_parse_exactly() {
        let mut rng = spatial_fusion_core::Rng::new(4);
        for _ in 0..2000 {
            let (x, y, t) = (rng.next_f64(), rng.next_f64(), rng.uniform(-3.0, 3.0));
            let text = ONE
                .replace("0.125", &format!("{t:?}"))
                .replace("[0.25, 0.5]", &format!("[{x:?}, {y:?}]"));
            let r = &parse_manifest(&text).unwrap()[0];
            assert_eq!(r.speaker_xy, [x, y]);
            assert_eq!(r.target, Target::Number(t));
        }
    }
}
