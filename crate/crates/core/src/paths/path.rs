use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{invalid, Result};

/// A vector-valued function of time sampled on a uniform [`Grid`].
///
/// Values are stored row-major: row `k` holds the `dim` components at
/// `grid.time(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    grid: Grid,
    dim: usize,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: Grid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("path dimension must be positive"));
        }
        if values.len() != grid.len() * dim {
            return Err(invalid(format!(
                "expected {} values for {} points of dimension {dim}, got {}",
                grid.len() * dim,
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at row {}", i / dim)));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn scalar(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, 1, values)
    }

    pub fn zeros(grid: Grid, dim: usize) -> Self {
        Self { grid, dim, values: vec![0.0; grid.len() * dim] }
    }

    pub fn from_fn(grid: Grid, dim: usize, mut f: impl FnMut(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * dim);
        for t in grid.times() {
            let v = f(t);
            if v.len() != dim {
                return Err(invalid("closure returned a vector of the wrong dimension"));
            }
            values.extend(v);
        }
        Self::new(grid, dim, values)
    }

    pub fn from_scalar_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.times().map(f).collect();
        Self { grid, dim: 1, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.dim + j]
    }

    pub fn last(&self) -> &[f64] {
        self.row(self.len() - 1)
    }

    pub fn component(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(self.dim).copied().collect()
    }

    pub fn from_components(grid: Grid, components: &[Vec<f64>]) -> Result<Self> {
        let dim = components.len();
        if dim == 0 || components.iter().any(|c| c.len() != grid.len()) {
            return Err(invalid("component lengths must match the grid"));
        }
        let mut values = Vec::with_capacity(grid.len() * dim);
        for k in 0..grid.len() {
            values.extend(components.iter().map(|c| c[k]));
        }
        Self::new(grid, dim, values)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, dim: self.dim, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `a * self + b * other` on a shared grid.
    pub fn combine(&self, a: f64, other: &SampledPath, b: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { grid: self.grid, dim: self.dim, values })
    }

    pub fn add(&self, other: &SampledPath) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub(crate) fn grid_matches(&self, other: &SampledPath) -> Result<()> {
        let (a, b) = (self.grid, other.grid);
        if a.len() != b.len() || !super::same_step(a.dt(), b.dt()) || (a.t0() - b.t0()).abs() > 1e-9 * a.dt() {
            return Err(invalid("paths live on different grids"));
        }
        Ok(())
    }

    pub(crate) fn check_compatible(&self, other: &SampledPath) -> Result<()> {
        if self.dim != other.dim || self.grid.len() != other.grid.len() {
            return Err(invalid("paths differ in dimension or length"));
        }
        if !super::same_step(self.grid.dt(), other.grid.dt())
            || (self.grid.t0() - other.grid.t0()).abs() > 1e-9 * self.grid.dt()
        {
            return Err(invalid("paths live on different grids"));
        }
        Ok(())
    }

    /// Prefix of the path up to and including row `k`.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        let grid = Grid::new(self.grid.t0(), self.grid.dt(), k + 1)?;
        Self::new(grid, self.dim, self.values[..(k + 1) * self.dim].to_vec())
    }

    /// Every `factor`-th point.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let mut values = Vec::with_capacity(grid.len() * self.dim);
        for k in 0..grid.len() {
            values.extend_from_slice(self.row(k * factor));
        }
        Self::new(grid, self.dim, values)
    }

    pub fn max_abs_diff(&self, other: &SampledPath) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
