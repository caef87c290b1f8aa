//! Parameter directories: one MSKT file per tensor plus `index.json`
//! recording the model configuration, names, shapes and registry positions.
//! Values round to 32-bit floats on the way out.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spatial_fusion_core::fusion::FusionParams;
use spatial_fusion_core::{Matrix, ParamStore};

use crate::mskt::{read_tensor, write_tensor};
use crate::report::{read_json, write_json, ModelSettings};
use crate::{Error, Result};

pub const INDEX: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub file: String,
    pub shape: [usize; 2],
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsIndex {
    pub model: ModelSettings,
    pub tensors: Vec<TensorEntry>,
}

pub fn save_params(dir: &Path, params: &FusionParams) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tensors = Vec::new();
    for (i, (name, m)) in params.store().iter().enumerate() {
        let file = format!("{i:02}_{name}.mskt");
        write_tensor(&dir.join(&file), m)?;
        tensors.push(TensorEntry {
            name: name.to_string(),
            file,
            shape: [m.rows(), m.cols()],
            position: i,
        });
    }
    let index = ParamsIndex {
        model: (*params.config()).into(),
        tensors,
    };
    write_json(&dir.join(INDEX), &index)
}

pub fn load_params(dir: &Path) -> Result<FusionParams> {
    let index_path = dir.join(INDEX);
    let index: ParamsIndex = read_json(&index_path)?;
    let mut entries = index.tensors;
    entries.sort_by_key(|t| t.position);
    let mut store = ParamStore::new();
    for (i, t) in entries.iter().enumerate() {
        if t.position != i {
            return Err(Error::Invalid(format!(
                "{}: registry positions must be 0..{}, found {}",
                index_path.display(),
                entries.len(),
                t.position
            )));
        }
        let path = dir.join(&t.file);
        let m: Matrix = read_tensor(&path)?;
        if [m.rows(), m.cols()] != t.shape {
            return Err(Error::Invalid(format!(
                "{}: shape {}x{} disagrees with index {}x{}",
                path.display(),
                m.rows(),
                m.cols(),
                t.shape[0],
                t.shape[1]
            )));
        }
        store.register(t.name.clone(), m)?;
    }
    Ok(FusionParams::from_store(index.model.into(), store)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spatial_fusion_core::fusion::ModelConfig;
    use spatial_fusion_core::Rng;

    #[test]
    fn round_trip_rounds_to_f32() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ModelConfig {
            dim: 8,
            heads: 2,
            ..ModelConfig::default()
        };
        let params = FusionParams::init(cfg, &mut Rng::new(3)).unwrap();
        save_params(dir.path(), &params).unwrap();
        let back = load_params(dir.path()).unwrap();
        assert_eq!(back.config(), params.config());
        for ((n1, a), (n2, b)) in params.store().iter().zip(back.store().iter()) {
            assert_eq!(n1, n2);
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert_eq!(*x as f32 as f64, *y);
            }
        }
        // A second save of the loaded values is lossless.
        let dir2 = tempfile::tempdir().unwrap();
        save_params(dir2.path(), &back).unwrap();
        assert_eq!(load_params(dir2.path()).unwrap(), back);
    }

    #[test]
    fn shape_disagreement_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ModelConfig {
            dim: 4,
            heads: 1,
            bands: 2,
            pool: 4,
            ..ModelConfig::default()
        };
        save_params(
            dir.path(),
            &FusionParams::init(cfg, &mut Rng::new(1)).unwrap(),
        )
        .unwrap();
        let idx = dir.path().join(INDEX);
        let text = std::fs::read_to_string(&idx).unwrap().replacen(
            "\"shape\": [\n        4,",
            "\"shape\": [\n        5,",
            1,
        );
        std::fs::write(&idx, text).unwrap();
        assert!(matches!(load_params(dir.path()), Err(Error::Invalid(_))));
    }
}
