use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::Matrix;
use crate::{Error, Result};

/// Ordered registry of named matrices. Iteration order is registration
/// order; the same type doubles as the gradient store.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Matrix>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a parameter and returns its registry index.
    pub fn register(&mut self, name: impl Into<String>, value: Matrix) -> Result<usize> {
        let name = name.into();
        if self.index_of(&name).is_some() {
            return Err(Error::InvalidArgument(alloc::format!(
                "duplicate parameter name `{name}`"
            )));
        }
        self.names.push(name);
        self.values.push(value);
        Ok(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Result<&Matrix> {
        self.index_of(name)
            .map(|i| &self.values[i])
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn by_index(&self, i: usize) -> &Matrix {
        &self.values[i]
    }

    pub fn by_index_mut(&mut self, i: usize) -> &mut Matrix {
        &mut self.values[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Matrix)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    /// Total scalar count across every parameter.
    pub fn num_scalars(&self) -> usize {
        self.values.iter().map(Matrix::len).sum()
    }

    /// Same names and shapes, all zeros.
    pub fn zeros_like(&self) -> ParamStore {
        ParamStore {
            names: self.names.clone(),
            values: self
                .values
                .iter()
                .map(|m| Matrix::zeros(m.rows(), m.cols()))
                .collect(),
        }
    }

    /// Checks that `other` has the same names and shapes in the same order.
    pub fn check_compatible(&self, other: &ParamStore) -> Result<()> {
        if self.names != other.names {
            return Err(Error::InvalidArgument(
                "parameter stores have different registries".to_string(),
            ));
        }
        for (a, b) in self.values.iter().zip(&other.values) {
            if a.shape() != b.shape() {
                return Err(Error::ShapeMismatch {
                    op: "param store",
                    left: a.shape(),
                    right: b.shape(),
                });
            }
        }
        Ok(())
    }

    /// Accumulates `k * other` into `self`.
    pub fn axpy(&mut self, k: f64, other: &ParamStore) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += k * y;
            }
        }
        Ok(())
    }
}
