//! Straight-line re-implementation of the sample forward pass in
//! double-double arithmetic, independent of the tape.
//!
//! Used as the finite-difference oracle for the full-pipeline gradient
//! check, where some analytic gradients sit below what an `f64` loss
//! difference can resolve.

use alloc::vec::Vec;

use super::model::FusionParams;
use super::pipeline::Sample;
use crate::knowledge::{adaptive_max_pool, encode_position_raw};
use crate::numerics::{AttentionBlock, Matrix, TwoFloat};
use crate::Result;

type T = TwoFloat;

#[derive(Debug, Clone)]
struct M {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl M {
    fn from_matrix(m: &Matrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().iter().map(|&v| T::from_f64(v)).collect(),
        }
    }

    fn row(v: &[f64]) -> Self {
        Self {
            rows: 1,
            cols: v.len(),
            data: v.iter().map(|&x| T::from_f64(x)).collect(),
        }
    }

    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    fn matmul(&self, b: &M) -> M {
        assert_eq!(self.cols, b.rows);
        let mut data = Vec::with_capacity(self.rows * b.cols);
        for i in 0..self.rows {
            for j in 0..b.cols {
                data.push((0..self.cols).map(|k| self.at(i, k) * b.at(k, j)).sum());
            }
        }
        M {
            rows: self.rows,
            cols: b.cols,
            data,
        }
    }

    fn transpose(&self) -> M {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.at(i, j));
            }
        }
        M {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    fn zip(&self, b: &M, f: impl Fn(T, T) -> T) -> M {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        M {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&b.data)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        }
    }

    fn map(&self, f: impl Fn(T) -> T) -> M {
        M {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    fn add_row(&self, b: &M) -> M {
        assert_eq!((b.rows, b.cols), (1, self.cols));
        let mut out = self.clone();
        for (k, v) in out.data.iter_mut().enumerate() {
            *v = *v + b.data[k % self.cols];
        }
        out
    }

    fn slice_cols(&self, start: usize, width: usize) -> M {
        let mut data = Vec::with_capacity(self.rows * width);
        for i in 0..self.rows {
            data.extend_from_slice(
                &self.data[i * self.cols + start..i * self.cols + start + width],
            );
        }
        M {
            rows: self.rows,
            cols: width,
            data,
        }
    }

    fn concat_cols(parts: &[&M]) -> M {
        let rows = parts[0].rows;
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for p in parts {
                data.extend_from_slice(&p.data[i * p.cols..(i + 1) * p.cols]);
            }
        }
        M { rows, cols, data }
    }

    /// Softmax of every row (`by_row`) or every column.
    fn softmax(&self, by_row: bool) -> M {
        self.lanes(by_row, |lane| {
            let m = lane.iter().copied().fold(lane[0], T::max);
            let e: Vec<T> = lane.iter().map(|&x| (x - m).exp()).collect();
            let z: T = e.iter().copied().sum();
            e.into_iter().map(|x| x / z).collect()
        })
    }

    fn log_softmax(&self, by_row: bool) -> M {
        self.lanes(by_row, |lane| {
            let m = lane.iter().copied().fold(lane[0], T::max);
            let z: T = lane.iter().map(|&x| (x - m).exp()).sum();
            let lz = z.ln();
            lane.iter().map(|&x| x - m - lz).collect()
        })
    }

    fn lanes(&self, by_row: bool, f: impl Fn(&[T]) -> Vec<T>) -> M {
        let src = if by_row {
            self.clone()
        } else {
            self.transpose()
        };
        let mut data = Vec::with_capacity(src.data.len());
        for i in 0..src.rows {
            data.extend(f(&src.data[i * src.cols..(i + 1) * src.cols]));
        }
        let out = M {
            rows: src.rows,
            cols: src.cols,
            data,
        };
        if by_row {
            out
        } else {
            out.transpose()
        }
    }
}

struct Ctx<'a> {
    params: &'a FusionParams,
}

impl Ctx<'_> {
    fn p(&self, idx: usize) -> M {
        M::from_matrix(self.params.store().by_index(idx))
    }

    fn attention(&self, block: &AttentionBlock, q: &M, kv: &M, heads: usize) -> M {
        let q = q.matmul(&self.p(block.w_q));
        let k = kv.matmul(&self.p(block.w_k));
        let v = kv.matmul(&self.p(block.w_v));
        let hd = q.cols / heads;
        let scale = T::ONE / T::from_f64(hd as f64).sqrt();
        let outs: Vec<M> = (0..heads)
            .map(|h| {
                let (qh, kh, vh) = (
                    q.slice_cols(h * hd, hd),
                    k.slice_cols(h * hd, hd),
                    v.slice_cols(h * hd, hd),
                );
                qh.matmul(&kh.transpose())
                    .map(|s| s * scale)
                    .softmax(true)
                    .matmul(&vh)
            })
            .collect();
        let refs: Vec<&M> = outs.iter().collect();
        M::concat_cols(&refs).matmul(&self.p(block.w_o))
    }

    fn enhanced(&self, f_p: &M, f_v: &M, fc: (usize, usize)) -> M {
        let s = f_p.transpose().matmul(f_v).softmax(false);
        let pos = f_v.matmul(&s);
        M::concat_cols(&[f_v, &pos])
            .matmul(&self.p(fc.0))
            .add_row(&self.p(fc.1))
            .softmax(true)
    }
}

/// Squared error `(prediction − target)²` of one sample, evaluated in
/// double-double precision from the `f64` parameters and inputs.
pub fn reference_squared_error(params: &FusionParams, sample: &Sample) -> Result<TwoFloat> {
    let cfg = params.config();
    let layout = params.layout();
    let ctx = Ctx { params };

    let pos = &layout.position;
    let pooled = adaptive_max_pool(&encode_position_raw(sample.position, pos.bands)?, pos.pool)?;
    let hidden = M::row(&pooled)
        .matmul(&ctx.p(pos.w1))
        .add_row(&ctx.p(pos.b1))
        .map(|x| if x > T::ZERO { x } else { T::ZERO });
    let f_p = hidden.matmul(&ctx.p(pos.w2)).add_row(&ctx.p(pos.b2));

    let f_r = M::row(sample.rgb.values());
    let f_d = M::row(sample.depth.values());
    let f_s = M::row(sample.semantic.values());

    let rgb_rooted = f_r
        .zip(&ctx.attention(&layout.phi_sr, &f_r, &f_r, 1), |a, b| a + b)
        .zip(&ctx.attention(&layout.phi_cr, &f_r, &f_d, 1), |a, b| a + b);
    let depth_rooted = f_d
        .zip(&ctx.attention(&layout.phi_sd, &f_d, &f_d, 1), |a, b| a + b)
        .zip(&ctx.attention(&layout.phi_cd, &f_d, &f_r, 1), |a, b| a + b);
    let (f_r_prime, f_d_prime) = if cfg.swap_interaction_labels {
        (rgb_rooted, depth_rooted)
    } else {
        (depth_rooted, rgb_rooted)
    };

    let v_r = ctx.enhanced(&f_p, &f_r_prime, layout.fc_r);
    let v_d = ctx.enhanced(&f_p, &f_d_prime, layout.fc_d);
    let v_s = ctx.attention(&layout.mha_s, &f_s, &f_r_prime, cfg.heads);

    let stack = M {
        rows: 3,
        cols: v_r.cols,
        data: [v_r.data, v_d.data, v_s.data].concat(),
    };
    let p = stack.softmax(true);
    let log_p = stack.log_softmax(true);
    let neg_u = M {
        rows: 1,
        cols: 3,
        data: (0..3)
            .map(|i| (0..stack.cols).map(|j| p.at(i, j) * log_p.at(i, j)).sum())
            .collect(),
    };
    let lambda = neg_u.softmax(true);
    let h = lambda.matmul(&stack);

    let (w, b) = layout.head;
    let pred = h.matmul(&ctx.p(w)).add_row(&ctx.p(b)).data[0];
    let r = pred - T::from_f64(sample.target);
    Ok(r * r)
}
