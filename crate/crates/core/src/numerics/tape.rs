//! Reverse-mode automatic differentiation over dense matrices.
//!
//! A [`Tape`] records every primitive as it is evaluated, so node ids are
//! already in topological order and the backward sweep is a single reverse
//! pass. Parameters are borrowed from a [`ParamStore`] instead of copied:
//! building a tape per sample costs nothing for the weights it never touches.

use alloc::vec;
use alloc::vec::Vec;

use super::{Axis, Matrix, ParamStore};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param(usize),
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    AddRow(NodeId, NodeId),
    Scale(NodeId, f64),
    Transpose(NodeId),
    Softmax(NodeId, Axis),
    LogSoftmax(NodeId, Axis),
    Relu(NodeId),
    Square(NodeId),
    ConcatCols(Vec<NodeId>),
    ConcatRows(Vec<NodeId>),
    SliceCols(NodeId, usize),
    SumCols(NodeId),
    Sum(NodeId),
    Mean(NodeId),
}

#[derive(Debug)]
struct Node {
    op: Op,
    // None for parameters, whose value lives in the borrowed store.
    value: Option<Matrix>,
}

#[derive(Debug)]
pub struct Tape<'p> {
    params: &'p ParamStore,
    param_nodes: Vec<Option<NodeId>>,
    nodes: Vec<Node>,
}

/// Result of a backward pass.
#[derive(Debug)]
pub struct Gradients {
    nodes: Vec<Option<Matrix>>,
    params: ParamStore,
}

impl Gradients {
    /// Gradient with respect to any recorded node; `None` if unreachable.
    pub fn wrt(&self, id: NodeId) -> Option<&Matrix> {
        self.nodes[id.0].as_ref()
    }

    /// Gradients for every parameter of the store, zeros where unreachable.
    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn into_params(self) -> ParamStore {
        self.params
    }
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Self {
            params,
            param_nodes: vec![None; params.len()],
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Matrix {
        let node = &self.nodes[id.0];
        match (&node.op, &node.value) {
            (_, Some(v)) => v,
            (Op::Param(i), None) => self.params.by_index(*i),
            _ => unreachable!("non-parameter node without a value"),
        }
    }

    fn push(&mut self, op: Op, value: Matrix) -> NodeId {
        self.nodes.push(Node {
            op,
            value: Some(value),
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn input(&mut self, value: Matrix) -> NodeId {
        self.push(Op::Input, value)
    }

    /// Leaf for registry entry `index`; repeated calls share one node.
    pub fn param(&mut self, index: usize) -> NodeId {
        if let Some(id) = self.param_nodes[index] {
            return id;
        }
        self.nodes.push(Node {
            op: Op::Param(index),
            value: None,
        });
        let id = NodeId(self.nodes.len() - 1);
        self.param_nodes[index] = Some(id);
        id
    }

    pub fn param_named(&mut self, name: &str) -> Result<NodeId> {
        let index = self
            .params
            .index_of(name)
            .ok_or_else(|| Error::UnknownParam(name.into()))?;
        Ok(self.param(index))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).matmul(self.value(b))?;
        Ok(self.push(Op::MatMul(a, b), v))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).add(self.value(b))?;
        Ok(self.push(Op::Add(a, b), v))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).sub(self.value(b))?;
        Ok(self.push(Op::Sub(a, b), v))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).hadamard(self.value(b))?;
        Ok(self.push(Op::Mul(a, b), v))
    }

    /// `a + 1·bias` where `bias` is a single row.
    pub fn add_row(&mut self, a: NodeId, bias: NodeId) -> Result<NodeId> {
        let v = self.value(a).add_row(self.value(bias))?;
        Ok(self.push(Op::AddRow(a, bias), v))
    }

    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        let v = self.value(a).scale(k);
        self.push(Op::Scale(a, k), v)
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).transpose();
        self.push(Op::Transpose(a), v)
    }

    pub fn softmax(&mut self, a: NodeId, axis: Axis) -> NodeId {
        let v = self.value(a).softmax(axis);
        self.push(Op::Softmax(a, axis), v)
    }

    pub fn log_softmax(&mut self, a: NodeId, axis: Axis) -> NodeId {
        let v = self.value(a).log_softmax(axis);
        self.push(Op::LogSoftmax(a, axis), v)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(|x| x.max(0.0));
        self.push(Op::Relu(a), v)
    }

    pub fn square(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(|x| x * x);
        self.push(Op::Square(a), v)
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let mats: Vec<&Matrix> = parts.iter().map(|&p| self.value(p)).collect();
        let v = Matrix::concat_cols(&mats)?;
        Ok(self.push(Op::ConcatCols(parts.to_vec()), v))
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let mats: Vec<&Matrix> = parts.iter().map(|&p| self.value(p)).collect();
        let v = Matrix::concat_rows(&mats)?;
        Ok(self.push(Op::ConcatRows(parts.to_vec()), v))
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let v = self.value(a).slice_cols(start, len)?;
        Ok(self.push(Op::SliceCols(a, start), v))
    }

    /// Row sums, rows×1.
    pub fn sum_cols(&mut self, a: NodeId) -> NodeId {
        let m = self.value(a);
        let sums: Vec<f64> = (0..m.rows()).map(|r| m.row_slice(r).iter().sum()).collect();
        let v = Matrix::from_vec(m.rows(), 1, sums).expect("row sums");
        self.push(Op::SumCols(a), v)
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let v = Matrix::scalar(self.value(a).sum());
        self.push(Op::Sum(a), v)
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let m = self.value(a);
        let v = Matrix::scalar(m.sum() / m.len() as f64);
        self.push(Op::Mean(a), v)
    }

    /// Reverse sweep from a 1×1 `loss` node.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        let (rows, cols) = self.value(loss).shape();
        if (rows, cols) != (1, 1) {
            return Err(Error::NonScalarLoss { rows, cols });
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Matrix::scalar(1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads)?;
            grads[i] = Some(g);
        }

        let mut params = self.params.zeros_like();
        for (index, node) in self.param_nodes.iter().enumerate() {
            if let Some(g) = node.and_then(|n| grads[n.0].as_ref()) {
                *params.by_index_mut(index) = g.clone();
            }
        }
        Ok(Gradients {
            nodes: grads,
            params,
        })
    }

    fn propagate(&self, i: usize, g: &Matrix, grads: &mut [Option<Matrix>]) -> Result<()> {
        let out = self.value(NodeId(i));
        match &self.nodes[i].op {
            Op::Input | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                let da = g.matmul(&self.value(*b).transpose())?;
                let db = self.value(*a).transpose().matmul(g)?;
                accumulate(grads, *a, da)?;
                accumulate(grads, *b, db)?;
            }
            Op::Add(a, b) => {
                accumulate(grads, *a, g.clone())?;
                accumulate(grads, *b, g.clone())?;
            }
            Op::Sub(a, b) => {
                accumulate(grads, *a, g.clone())?;
                accumulate(grads, *b, g.scale(-1.0))?;
            }
            Op::Mul(a, b) => {
                let da = g.hadamard(self.value(*b))?;
                let db = g.hadamard(self.value(*a))?;
                accumulate(grads, *a, da)?;
                accumulate(grads, *b, db)?;
            }
            Op::AddRow(a, bias) => {
                let mut db = Matrix::zeros(1, g.cols());
                for r in 0..g.rows() {
                    for (acc, v) in db.as_mut_slice().iter_mut().zip(g.row_slice(r)) {
                        *acc += v;
                    }
                }
                accumulate(grads, *a, g.clone())?;
                accumulate(grads, *bias, db)?;
            }
            Op::Scale(a, k) => accumulate(grads, *a, g.scale(*k))?,
            Op::Transpose(a) => accumulate(grads, *a, g.transpose())?,
            Op::Softmax(a, axis) => {
                let mut dx = Matrix::zeros(out.rows(), out.cols());
                for lane in out.lanes(*axis) {
                    let dot: f64 = lane
                        .iter()
                        .map(|&k| g.as_slice()[k] * out.as_slice()[k])
                        .sum();
                    for &k in &lane {
                        dx.as_mut_slice()[k] = out.as_slice()[k] * (g.as_slice()[k] - dot);
                    }
                }
                accumulate(grads, *a, dx)?;
            }
            Op::LogSoftmax(a, axis) => {
                let mut dx = Matrix::zeros(out.rows(), out.cols());
                for lane in out.lanes(*axis) {
                    let total: f64 = lane.iter().map(|&k| g.as_slice()[k]).sum();
                    for &k in &lane {
                        let p = crate::math::exp(out.as_slice()[k]);
                        dx.as_mut_slice()[k] = g.as_slice()[k] - p * total;
                    }
                }
                accumulate(grads, *a, dx)?;
            }
            Op::Relu(a) => {
                let x = self.value(*a);
                let dx = g.zip_with(x, "relu", |gv, xv| if xv > 0.0 { gv } else { 0.0 })?;
                accumulate(grads, *a, dx)?;
            }
            Op::Square(a) => {
                let x = self.value(*a);
                let dx = g.zip_with(x, "square", |gv, xv| 2.0 * xv * gv)?;
                accumulate(grads, *a, dx)?;
            }
            Op::ConcatCols(parts) => {
                let mut start = 0;
                for p in parts {
                    let width = self.value(*p).cols();
                    accumulate(grads, *p, g.slice_cols(start, width)?)?;
                    start += width;
                }
            }
            Op::ConcatRows(parts) => {
                let mut start = 0;
                for p in parts {
                    let (rows, cols) = self.value(*p).shape();
                    let chunk = g.as_slice()[start * cols..(start + rows) * cols].to_vec();
                    accumulate(grads, *p, Matrix::from_vec(rows, cols, chunk)?)?;
                    start += rows;
                }
            }
            Op::SliceCols(a, start) => {
                let src = self.value(*a);
                let mut dx = Matrix::zeros(src.rows(), src.cols());
                for r in 0..g.rows() {
                    for c in 0..g.cols() {
                        dx.set(r, start + c, g.get(r, c));
                    }
                }
                accumulate(grads, *a, dx)?;
            }
            Op::SumCols(a) => {
                let src = self.value(*a);
                let mut dx = Matrix::zeros(src.rows(), src.cols());
                for r in 0..src.rows() {
                    let gr = g.get(r, 0);
                    for c in 0..src.cols() {
                        dx.set(r, c, gr);
                    }
                }
                accumulate(grads, *a, dx)?;
            }
            Op::Sum(a) => {
                let (r, c) = self.value(*a).shape();
                accumulate(grads, *a, Matrix::filled(r, c, g.as_slice()[0]))?;
            }
            Op::Mean(a) => {
                let (r, c) = self.value(*a).shape();
                let n = (r * c) as f64;
                accumulate(grads, *a, Matrix::filled(r, c, g.as_slice()[0] / n))?;
            }
        }
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<Matrix>], id: NodeId, g: Matrix) -> Result<()> {
    match &mut grads[id.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => {
            *slot = Some(g);
            Ok(())
        }
    }
}
