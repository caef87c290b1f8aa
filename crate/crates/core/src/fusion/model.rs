use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::knowledge::PositionMlp;
use crate::numerics::{glorot_init, AttentionBlock, Matrix, ParamStore, Rng};
use crate::{Error, Result};

/// Architecture hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    /// Feature dimension `D`.
    pub dim: usize,
    /// Harmonic bands `L` of the position encoding.
    pub bands: usize,
    /// Adaptive pooling output size `O`.
    pub pool: usize,
    /// Heads of the semantic attention block.
    pub heads: usize,
    /// Name the RGB-rooted interaction output `F'_R` instead of `F'_D`.
    pub swap_interaction_labels: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dim: 512,
            bands: 10,
            pool: 16,
            heads: 4,
            swap_interaction_labels: false,
        }
    }
}

impl ModelConfig {
    pub fn with_dim(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.bands == 0 || self.pool == 0 || self.heads == 0 {
            return Err(Error::InvalidArgument(format!(
                "all model counts must be positive: {self:?}"
            )));
        }
        if !self.dim.is_multiple_of(self.heads) {
            return Err(Error::HeadsNotDivisible {
                dim: self.dim,
                heads: self.heads,
            });
        }
        if self.pool > 4 * self.bands {
            return Err(Error::InvalidArgument(format!(
                "pool size {} exceeds the {}-entry position encoding",
                self.pool,
                4 * self.bands
            )));
        }
        Ok(())
    }
}

/// Registry position of every learnable tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub position: PositionMlp,
    pub phi_sr: AttentionBlock,
    pub phi_cr: AttentionBlock,
    pub phi_sd: AttentionBlock,
    pub phi_cd: AttentionBlock,
    pub fc_r: (usize, usize),
    pub fc_d: (usize, usize),
    pub mha_s: AttentionBlock,
    pub head: (usize, usize),
}

/// Canonical registry: name, shape and whether the tensor is a bias.
/// Order is position MLP, Φ_sr, Φ_cr, Φ_sd, Φ_cd, FC_R, FC_D, MHA_S, toy head.
pub fn registry(config: &ModelConfig) -> Vec<(String, (usize, usize), bool)> {
    let d = config.dim;
    let mut out = Vec::new();
    let mut push =
        |name: &str, shape: (usize, usize), bias: bool| out.push((String::from(name), shape, bias));
    push("pos.w1", (config.pool, d), false);
    push("pos.b1", (1, d), true);
    push("pos.w2", (d, d), false);
    push("pos.b2", (1, d), true);
    for block in ["phi_sr", "phi_cr", "phi_sd", "phi_cd"] {
        for w in ["w_q", "w_k", "w_v", "w_o"] {
            push(&format!("{block}.{w}"), (d, d), false);
        }
    }
    for fc in ["fc_r", "fc_d"] {
        push(&format!("{fc}.w"), (2 * d, d), false);
        push(&format!("{fc}.b"), (1, d), true);
    }
    for w in ["w_q", "w_k", "w_v", "w_o"] {
        push(&format!("mha_s.{w}"), (d, d), false);
    }
    push("head.w", (d, 1), false);
    push("head.b", (1, 1), true);
    out
}

/// All learnable state of the fusion encoder plus its toy head.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionParams {
    config: ModelConfig,
    store: ParamStore,
    layout: Layout,
}

impl FusionParams {
    /// Glorot-uniform weights drawn in registry order, zero biases.
    pub fn init(config: ModelConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let mut store = ParamStore::new();
        for (name, (r, c), bias) in registry(&config) {
            let m = if bias {
                Matrix::zeros(r, c)
            } else {
                glorot_init(rng, r, c)?
            };
            store.register(name, m)?;
        }
        Self::from_store(config, store)
    }

    /// Wraps an existing store, checking names, order and shapes.
    pub fn from_store(config: ModelConfig, store: ParamStore) -> Result<Self> {
        config.validate()?;
        let expected = registry(&config);
        if store.len() != expected.len() {
            return Err(Error::InvalidArgument(format!(
                "parameter store has {} entries, registry expects {}",
                store.len(),
                expected.len()
            )));
        }
        for (i, (name, shape, _)) in expected.iter().enumerate() {
            if store.name(i) != name {
                return Err(Error::InvalidArgument(format!(
                    "registry slot {i} should be `{name}`, found `{}`",
                    store.name(i)
                )));
            }
            if store.by_index(i).shape() != *shape {
                return Err(Error::ShapeMismatch {
                    op: "parameter",
                    left: *shape,
                    right: store.by_index(i).shape(),
                });
            }
        }
        let layout = Self::resolve_layout(&config, &store)?;
        Ok(Self {
            config,
            store,
            layout,
        })
    }

    fn resolve_layout(config: &ModelConfig, store: &ParamStore) -> Result<Layout> {
        let idx = |name: &str| {
            store
                .index_of(name)
                .ok_or_else(|| Error::UnknownParam(name.into()))
        };
        let block = |prefix: &str| -> Result<AttentionBlock> {
            Ok(AttentionBlock {
                w_q: idx(&format!("{prefix}.w_q"))?,
                w_k: idx(&format!("{prefix}.w_k"))?,
                w_v: idx(&format!("{prefix}.w_v"))?,
                w_o: idx(&format!("{prefix}.w_o"))?,
            })
        };
        Ok(Layout {
            position: PositionMlp {
                bands: config.bands,
                pool: config.pool,
                w1: idx("pos.w1")?,
                b1: idx("pos.b1")?,
                w2: idx("pos.w2")?,
                b2: idx("pos.b2")?,
            },
            phi_sr: block("phi_sr")?,
            phi_cr: block("phi_cr")?,
            phi_sd: block("phi_sd")?,
            phi_cd: block("phi_cd")?,
            fc_r: (idx("fc_r.w")?, idx("fc_r.b")?),
            fc_d: (idx("fc_d.w")?, idx("fc_d.b")?),
            mha_s: block("mha_s")?,
            head: (idx("head.w")?, idx("head.b")?),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn into_store(self) -> ParamStore {
        self.store
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_order_is_canonical() {
        let p = FusionParams::init(ModelConfig::with_dim(16), &mut Rng::new(1)).unwrap();
        let names: Vec<&str> = p.store().iter().map(|(n, _)| n).collect();
        assert_eq!(&names[..4], &["pos.w1", "pos.b1", "pos.w2", "pos.b2"]);
        assert_eq!(names[4], "phi_sr.w_q");
        assert_eq!(names[8], "phi_cr.w_q");
        assert_eq!(names[12], "phi_sd.w_q");
        assert_eq!(names[16], "phi_cd.w_q");
        assert_eq!(&names[20..24], &["fc_r.w", "fc_r.b", "fc_d.w", "fc_d.b"]);
        assert_eq!(names[24], "mha_s.w_q");
        assert_eq!(&names[28..], &["head.w", "head.b"]);
        assert_eq!(p.store().by_index(p.layout().fc_r.0).shape(), (32, 16));
    }

    #[test]
    fn init_is_seeded() {
        let a = FusionParams::init(ModelConfig::with_dim(16), &mut Rng::new(3)).unwrap();
        let b = FusionParams::init(ModelConfig::with_dim(16), &mut Rng::new(3)).unwrap();
        let c = FusionParams::init(ModelConfig::with_dim(16), &mut Rng::new(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a
            .store()
            .get("fc_d.b")
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn config_validation() {
        let bad_heads = ModelConfig {
            heads: 3,
            ..ModelConfig::with_dim(16)
        };
        assert_eq!(
            bad_heads.validate(),
            Err(Error::HeadsNotDivisible { dim: 16, heads: 3 })
        );
        let bad_pool = ModelConfig {
            bands: 2,
            pool: 9,
            ..ModelConfig::with_dim(16)
        };
        assert!(bad_pool.validate().is_err());
    }

    #[test]
    fn from_store_rejects_reordered_registry() {
        let p = FusionParams::init(ModelConfig::with_dim(8), &mut Rng::new(1)).unwrap();
        let mut shuffled = ParamStore::new();
        let entries: Vec<_> = p
            .store()
            .iter()
            .map(|(n, m)| (String::from(n), m.clone()))
            .collect();
        for (n, m) in entries.iter().rev() {
            shuffled.register(n.clone(), m.clone()).unwrap();
        }
        assert!(FusionParams::from_store(*p.config(), shuffled).is_err());
    }
}
