use serde::{Deserialize, Serialize};

use super::grid_steps;
use crate::error::{invalid, Result};

/// Uniform time grid `t0, t0 + dt, ..., t0 + (n - 1) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    t0: f64,
    dt: f64,
    n: usize,
}

impl Grid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !t0.is_finite() {
            return Err(invalid("grid origin must be finite"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("grid step must be positive, got {dt}")));
        }
        if n < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {n}")));
        }
        Ok(Self { t0, dt, n })
    }

    /// Grid on `[0, horizon]` with step `dt`; `horizon` must be a multiple of `dt`.
    pub fn forward(horizon: f64, dt: f64) -> Result<Self> {
        let m = grid_steps(horizon, dt)
            .ok_or_else(|| invalid(format!("horizon {horizon} is not a multiple of dt = {dt}")))?;
        Self::new(0.0, dt, m + 1)
    }

    /// Grid on `[-horizon, 0]` whose last point is exactly `0.0`.
    pub fn past(horizon: f64, dt: f64) -> Result<Self> {
        let m = grid_steps(horizon, dt)
            .ok_or_else(|| invalid(format!("horizon {horizon} is not a multiple of dt = {dt}")))?;
        Self::past_points(m + 1, dt)
    }

    pub fn past_points(n: usize, dt: f64) -> Result<Self> {
        let m = n.saturating_sub(1);
        Self::new(-(m as f64 * dt), dt, n)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.n - 1)
    }

    pub fn span(&self) -> f64 {
        (self.n - 1) as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.time(k))
    }

    /// Index of time `t` if it is a grid point.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = grid_steps(t - self.t0, self.dt)?;
        (k < self.n).then_some(k)
    }

    /// The grid with every `factor`-th point, starting at `t0`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(invalid("coarsening factor must be positive"));
        }
        Self::new(self.t0, self.dt * factor as f64, (self.n - 1) / factor + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn past_grid_ends_at_zero() {
        for &(h, dt) in &[(64.0, 0.01), (1.0, 1.0 / 3.0), (10.0, 0.1)] {
            let g = Grid::past(h, dt).unwrap();
            assert_eq!(g.end(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0.0, 0.0, 4).is_err());
        assert!(Grid::new(0.0, 0.1, 1).is_err());
        assert!(Grid::forward(1.05, 0.1).is_err());
    }

    #[test]
    fn index_lookup() {
        let g = Grid::forward(1.0, 0.125).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.index_of(0.5), Some(4));
        assert_eq!(g.index_of(0.3), None);
        assert_eq!(g.index_of(2.0), None);
    }
}
