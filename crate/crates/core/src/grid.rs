//! Real-valued voxel grids in 1, 2 or 3 dimensions.
//!
//! Values are stored row-major: the last axis varies fastest.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid must have 1, 2 or 3 dimensions, got {0}")]
    UnsupportedRank(usize),
    #[error("grid axis {axis} has zero length")]
    EmptyAxis { axis: usize },
    #[error("value count {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid dimensions differ: {left:?} vs {right:?}")]
    DimsMismatch { left: Vec<usize>, right: Vec<usize> },
}

/// Tracer concentration (or any real field) sampled on a regular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    dims: Vec<usize>,
    values: Vec<f64>,
}

pub(crate) fn check_dims(dims: &[usize]) -> Result<usize, GridError> {
    if dims.is_empty() || dims.len() > 3 {
        return Err(GridError::UnsupportedRank(dims.len()));
    }
    if let Some(axis) = dims.iter().position(|&d| d == 0) {
        return Err(GridError::EmptyAxis { axis });
    }
    Ok(dims.iter().product())
}

impl ImageGrid {
    pub fn new(dims: &[usize], values: Vec<f64>) -> Result<Self, GridError> {
        let n = check_dims(dims)?;
        if values.len() != n {
            return Err(GridError::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
        Ok(Self {
            dims: dims.to_vec(),
            values,
        })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self, GridError> {
        let n = check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            values: vec![0.0; n],
        })
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self, GridError> {
        let n = check_dims(dims)?;
        let mut idx = vec![0usize; dims.len()];
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f(&idx));
            for axis in (0..dims.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < dims[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            values,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Flat offset of a multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.offset(idx)]
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn ensure_same_dims(&self, other: &ImageGrid) -> Result<(), GridError> {
        if self.dims != other.dims {
            return Err(GridError::DimsMismatch {
                left: self.dims.clone(),
                right: other.dims.clone(),
            });
        }
        Ok(())
    }
}
