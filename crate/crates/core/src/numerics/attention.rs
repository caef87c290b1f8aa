//! Scaled dot-product and multi-head attention, recorded on a [`Tape`].

use alloc::vec::Vec;

use super::{Axis, Matrix, NodeId, ParamStore, Tape};
use crate::math;
use crate::{Error, Result};

/// Registry indices of the four `D×D` projections of one attention block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttentionBlock {
    pub w_q: usize,
    pub w_k: usize,
    pub w_v: usize,
    pub w_o: usize,
}

/// `softmax(QKᵀ/√d_k) V`, softmax taken within each row of the scores.
pub fn scaled_dot_attention(
    tape: &mut Tape<'_>,
    q: NodeId,
    k: NodeId,
    v: NodeId,
) -> Result<NodeId> {
    let (q_shape, k_shape, v_shape) = (
        tape.value(q).shape(),
        tape.value(k).shape(),
        tape.value(v).shape(),
    );
    if q_shape.1 != k_shape.1 {
        return Err(Error::ShapeMismatch {
            op: "attention q/k",
            left: q_shape,
            right: k_shape,
        });
    }
    if k_shape.0 != v_shape.0 {
        return Err(Error::ShapeMismatch {
            op: "attention k/v",
            left: k_shape,
            right: v_shape,
        });
    }
    let kt = tape.transpose(k);
    let scores = tape.matmul(q, kt)?;
    let scaled = tape.scale(scores, 1.0 / math::sqrt(k_shape.1 as f64));
    let weights = tape.softmax(scaled, Axis::Cols);
    tape.matmul(weights, v)
}

/// Split-heads attention with query `q`, keys and values both taken from
/// `kv`, followed by the output projection `W_O`.
pub fn multi_head_attention(
    tape: &mut Tape<'_>,
    block: &AttentionBlock,
    q: NodeId,
    kv: NodeId,
    heads: usize,
) -> Result<NodeId> {
    let dim = tape.value(q).cols();
    if heads == 0 || !dim.is_multiple_of(heads) {
        return Err(Error::HeadsNotDivisible { dim, heads });
    }
    let w_q = tape.param(block.w_q);
    let w_k = tape.param(block.w_k);
    let w_v = tape.param(block.w_v);
    let w_o = tape.param(block.w_o);
    for w in [w_q, w_k, w_v, w_o] {
        let shape = tape.value(w).shape();
        if shape != (dim, dim) {
            return Err(Error::ShapeMismatch {
                op: "attention projection",
                left: (dim, dim),
                right: shape,
            });
        }
    }
    let q_proj = tape.matmul(q, w_q)?;
    let k_proj = tape.matmul(kv, w_k)?;
    let v_proj = tape.matmul(kv, w_v)?;

    let head_dim = dim / heads;
    let per_head = if heads == 1 {
        alloc::vec![scaled_dot_attention(tape, q_proj, k_proj, v_proj)?]
    } else {
        let mut outs = Vec::with_capacity(heads);
        for h in 0..heads {
            let qh = tape.slice_cols(q_proj, h * head_dim, head_dim)?;
            let kh = tape.slice_cols(k_proj, h * head_dim, head_dim)?;
            let vh = tape.slice_cols(v_proj, h * head_dim, head_dim)?;
            outs.push(scaled_dot_attention(tape, qh, kh, vh)?);
        }
        outs
    };
    let joined = if per_head.len() == 1 {
        per_head[0]
    } else {
        tape.concat_cols(&per_head)?
    };
    tape.matmul(joined, w_o)
}

/// Matrix-level convenience wrapper around [`scaled_dot_attention`].
pub fn attend(q: &Matrix, k: &Matrix, v: &Matrix) -> Result<Matrix> {
    let empty = ParamStore::new();
    let mut tape = Tape::new(&empty);
    let (q, k, v) = (
        tape.input(q.clone()),
        tape.input(k.clone()),
        tape.input(v.clone()),
    );
    let out = scaled_dot_attention(&mut tape, q, k, v)?;
    Ok(tape.value(out).clone())
}

/// Matrix-level convenience wrapper around [`multi_head_attention`].
pub fn attend_multi_head(
    projections: [&Matrix; 4],
    q: &Matrix,
    kv: &Matrix,
    heads: usize,
) -> Result<Matrix> {
    let mut store = ParamStore::new();
    let names = ["w_q", "w_k", "w_v", "w_o"];
    for (name, m) in names.iter().zip(projections) {
        store.register(*name, m.clone())?;
    }
    let block = AttentionBlock {
        w_q: 0,
        w_k: 1,
        w_v: 2,
        w_o: 3,
    };
    let mut tape = Tape::new(&store);
    let (q, kv) = (tape.input(q.clone()), tape.input(kv.clone()));
    let out = multi_head_attention(&mut tape, &block, q, kv, heads)?;
    Ok(tape.value(out).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{glorot_init, gradcheck::grad_check, Rng};

    fn random(rng: &mut Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_vec(r, c, rng.uniform_vec(r * c, -1.0, 1.0)).unwrap()
    }

    #[test]
    fn single_key_returns_its_value_row() {
        let mut rng = Rng::new(1);
        let q = random(&mut rng, 3, 4);
        let k = random(&mut rng, 1, 4);
        let v = random(&mut rng, 1, 5);
        let out = attend(&q, &k, &v).unwrap();
        for r in 0..3 {
            assert_eq!(out.row_slice(r), v.row_slice(0));
        }
        // Scaling q cannot matter with one key.
        assert_eq!(attend(&q.scale(17.0), &k, &v).unwrap(), out);
    }

    #[test]
    fn identical_keys_average_the_values() {
        let mut rng = Rng::new(2);
        let q = random(&mut rng, 2, 3);
        let key = random(&mut rng, 1, 3);
        let k = Matrix::concat_rows(&[&key, &key, &key, &key]).unwrap();
        let v = random(&mut rng, 4, 2);
        let out = attend(&q, &k, &v).unwrap();
        for c in 0..2 {
            let mean = (0..4).map(|r| v.get(r, c)).sum::<f64>() / 4.0;
            for r in 0..2 {
                assert!((out.get(r, c) - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn attention_rows_sum_to_one() {
        let mut rng = Rng::new(3);
        let q = random(&mut rng, 3, 4);
        let k = random(&mut rng, 5, 4);
        // Attending over an identity value matrix exposes the weight rows.
        let out = attend(&q, &k, &Matrix::identity(5)).unwrap();
        for r in 0..3 {
            assert!((out.row_slice(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(out.row_slice(r).iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn attention_dimension_checks() {
        let q = Matrix::zeros(1, 3);
        assert!(attend(&q, &Matrix::zeros(2, 4), &Matrix::zeros(2, 4)).is_err());
        assert!(attend(&q, &Matrix::zeros(2, 3), &Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn one_head_identity_projections_equal_plain_attention() {
        let mut rng = Rng::new(4);
        let q = random(&mut rng, 2, 6);
        let kv = random(&mut rng, 3, 6);
        let id = Matrix::identity(6);
        let mha = attend_multi_head([&id, &id, &id, &id], &q, &kv, 1).unwrap();
        assert_eq!(mha, attend(&q, &kv, &kv).unwrap());
    }

    #[test]
    fn single_row_kv_gives_value_projection_for_any_query() {
        let mut rng = Rng::new(5);
        let ws: Vec<Matrix> = (0..4)
            .map(|_| glorot_init(&mut rng, 8, 8).unwrap())
            .collect();
        let kv = random(&mut rng, 1, 8);
        let expected = kv.matmul(&ws[2]).unwrap().matmul(&ws[3]).unwrap();
        for heads in [1, 2, 4] {
            for _ in 0..3 {
                let q = random(&mut rng, 1, 8);
                let out =
                    attend_multi_head([&ws[0], &ws[1], &ws[2], &ws[3]], &q, &kv, heads).unwrap();
                for (a, b) in out.as_slice().iter().zip(expected.as_slice()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn output_shape_follows_query() {
        let mut rng = Rng::new(6);
        let ws: Vec<Matrix> = (0..4)
            .map(|_| glorot_init(&mut rng, 16, 16).unwrap())
            .collect();
        let q = random(&mut rng, 3, 16);
        let kv = random(&mut rng, 5, 16);
        for heads in [1, 2, 4] {
            let out = attend_multi_head([&ws[0], &ws[1], &ws[2], &ws[3]], &q, &kv, heads).unwrap();
            assert_eq!(out.shape(), (3, 16));
        }
        let err = attend_multi_head([&ws[0], &ws[1], &ws[2], &ws[3]], &q, &kv, 3).unwrap_err();
        assert_eq!(err, Error::HeadsNotDivisible { dim: 16, heads: 3 });
    }

    #[test]
    fn multi_head_gradients_match_finite_differences() {
        let mut rng = Rng::new(8);
        let mut store = ParamStore::new();
        for name in ["w_q", "w_k", "w_v", "w_o"] {
            store
                .register(name, glorot_init(&mut rng, 8, 8).unwrap())
                .unwrap();
        }
        store.register("q", random(&mut rng, 2, 8)).unwrap();
        store.register("kv", random(&mut rng, 3, 8)).unwrap();
        let block = AttentionBlock {
            w_q: 0,
            w_k: 1,
            w_v: 2,
            w_o: 3,
        };
        let target = random(&mut rng, 2, 8);
        let f = |p: &ParamStore| {
            let mut t = Tape::new(p);
            let q = t.param(4);
            let kv = t.param(5);
            let out = multi_head_attention(&mut t, &block, q, kv, 2).unwrap();
            let tgt = t.input(target.clone());
            let d = t.sub(out, tgt).unwrap();
            let sq = t.square(d);
            let loss = t.sum(sq);
            let value = t.value(loss).item().unwrap();
            (value, t.backward(loss).unwrap().into_params())
        };
        let (_, analytic) = f(&store);
        let report = grad_check(|p| f(p).0, &store, &analytic, 1e-6).unwrap();
        assert!(report.max_rel_err <= 1e-5, "{report:?}");
    }
}
