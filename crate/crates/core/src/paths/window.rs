use serde::{Deserialize, Serialize};

use super::{grid_steps, same_step, Grid, SampledPath, GRID_TOL};
use crate::error::{invalid, Error, Result};

/// Past noise path on `[-horizon, 0]`, anchored so that it vanishes at `0`.
///
/// The window keeps the *raw* samples of an underlying path; the value at
/// row `k` is `raw[k] - raw[last]`. Shifting truncates the raw buffer and
/// concatenation appends to it, so `shift_theta(concat_m(w, f, t), t)`
/// reproduces `w` bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseWindow {
    dt: f64,
    dim: usize,
    raw: Vec<f64>,
}

impl NoiseWindow {
    /// Window from raw samples (row-major, oldest first). The anchor is the
    /// last row, so any additive offset in `raw` is irrelevant.
    pub fn from_raw(dt: f64, dim: usize, raw: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("window step must be positive, got {dt}")));
        }
        if dim == 0 || raw.len() % dim != 0 || raw.len() / dim < 2 {
            return Err(invalid("window needs at least 2 points of a positive dimension"));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(invalid("window contains non-finite values"));
        }
        Ok(Self { dt, dim, raw })
    }

    /// Window whose values are given directly; the last row must be zero.
    pub fn from_path(path: &SampledPath) -> Result<Self> {
        let g = path.grid();
        if g.end().abs() > GRID_TOL * g.dt() {
            return Err(invalid(format!("window must end at time 0, ends at {}", g.end())));
        }
        if path.last().iter().any(|&v| v != 0.0) {
            return Err(invalid("window must vanish at time 0"));
        }
        Self::from_raw(g.dt(), path.dim(), path.values().to_vec())
    }

    /// Window `s -> x(T + s) - x(T)` seen from the end of a forward path.
    pub fn from_forward_path(path: &SampledPath) -> Result<Self> {
        Self::from_raw(path.grid().dt(), path.dim(), path.values().to_vec())
    }

    pub fn zeros(horizon: f64, dt: f64, dim: usize) -> Result<Self> {
        let g = Grid::past(horizon, dt)?;
        Self::from_raw(dt, dim, vec![0.0; g.len() * dim])
    }

    /// Samples `f` on the past grid and anchors the result at `0`.
    pub fn from_fn(horizon: f64, dt: f64, dim: usize, f: impl FnMut(f64) -> Vec<f64>) -> Result<Self> {
        let path = SampledPath::from_fn(Grid::past(horizon, dt)?, dim, f)?;
        Self::from_forward_path(&path)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.raw.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn grid(&self) -> Grid {
        Grid::past_points(self.len(), self.dt).expect("window has at least 2 points")
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    /// Value of component `j` at row `k` (time `-(len - 1 - k) dt`).
    pub fn value(&self, k: usize, j: usize) -> f64 {
        let last = (self.len() - 1) * self.dim;
        self.raw[k * self.dim + j] - self.raw[last + j]
    }

    /// Value at time `-lag * dt`.
    pub fn at_lag(&self, lag: usize, j: usize) -> f64 {
        self.value(self.len() - 1 - lag, j)
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.len();
        let anchor = &self.raw[(n - 1) * self.dim..];
        self.raw
            .chunks_exact(self.dim)
            .flat_map(|row| row.iter().zip(anchor).map(|(r, a)| r - a))
            .collect()
    }

    /// Component `j` ordered by increasing lag, i.e. `w̄_j(k dt) = w_j(-k dt)`.
    pub fn reflected_component(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|lag| self.at_lag(lag, j)).collect()
    }

    pub fn to_path(&self) -> SampledPath {
        SampledPath::new(self.grid(), self.dim, self.values()).expect("window values are finite")
    }

    /// Keeps only the most recent `horizon` of past.
    pub fn trim(&self, horizon: f64) -> Result<Self> {
        let m = grid_steps(horizon, self.dt)
            .ok_or_else(|| invalid(format!("trim horizon {horizon} is not a multiple of dt")))?;
        if m == 0 {
            return Err(invalid("trim horizon must be positive"));
        }
        let n = self.len();
        if m + 1 >= n {
            return Ok(self.clone());
        }
        Ok(Self { dt: self.dt, dim: self.dim, raw: self.raw[(n - m - 1) * self.dim..].to_vec() })
    }

    /// `a * self + b * other`; both windows must share step, length and dimension.
    pub fn combine(&self, a: f64, other: &NoiseWindow, b: f64) -> Result<Self> {
        if !same_step(self.dt, other.dt) || self.dim != other.dim || self.len() != other.len() {
            return Err(invalid("windows differ in step, dimension or length"));
        }
        let x = self.values();
        let y = other.values();
        let raw = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        Self::from_raw(self.dt, self.dim, raw)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dt: self.dt, dim: self.dim, raw: self.values().into_iter().map(|v| c * v).collect() }
    }

    /// The scalar window of component `j`.
    pub fn component(&self, j: usize) -> Self {
        Self {
            dt: self.dt,
            dim: 1,
            raw: self.raw.iter().skip(j).step_by(self.dim).copied().collect(),
        }
    }

    pub fn from_components(components: &[NoiseWindow]) -> Result<Self> {
        let first = components.first().ok_or_else(|| invalid("no components"))?;
        if components.iter().any(|c| c.dim != 1 || c.len() != first.len() || !same_step(c.dt, first.dt)) {
            return Err(invalid("components must be scalar windows of equal length and step"));
        }
        let n = first.len();
        let mut raw = Vec::with_capacity(n * components.len());
        for k in 0..n {
            raw.extend(components.iter().map(|c| c.raw[k]));
        }
        Self::from_raw(first.dt, components.len(), raw)
    }

    fn steps(&self, t: f64) -> Result<usize> {
        grid_steps(t, self.dt).ok_or_else(|| invalid(format!("time {t} is not a multiple of dt = {}", self.dt)))
    }
}

/// `θ_t w (s) = w(s - t) - w(-t)` on `[-(horizon - t), 0]`.
///
/// Shifting by the whole horizon would leave a single point, so
/// `t >= horizon` is reported as an exhausted window.
pub fn shift_theta(w: &NoiseWindow, t: f64) -> Result<NoiseWindow> {
    let m = w.steps(t)?;
    let n = w.len();
    if m + 1 >= n {
        return Err(Error::WindowExhausted { requested: t, available: w.horizon() });
    }
    Ok(NoiseWindow { dt: w.dt, dim: w.dim, raw: w.raw[..(n - m) * w.dim].to_vec() })
}

/// Prepends the past `w` to a future path `future` on `[0, t]`, viewed from time `t`.
///
/// `future` may extend beyond `t`; only its prefix up to `t` is used.
pub fn concat_m(w: &NoiseWindow, future: &SampledPath, t: f64) -> Result<NoiseWindow> {
    let g = future.grid();
    if !same_step(g.dt(), w.dt) {
        return Err(invalid(format!("step mismatch: window dt = {}, future dt = {}", w.dt, g.dt())));
    }
    if future.dim() != w.dim {
        return Err(invalid("dimension mismatch between window and future path"));
    }
    if g.t0().abs() > GRID_TOL * g.dt() {
        return Err(invalid("future path must start at time 0"));
    }
    if future.row(0).iter().any(|&v| v != 0.0) {
        return Err(invalid("future path must vanish at time 0"));
    }
    let m = w.steps(t)?;
    if m >= g.len() {
        return Err(invalid(format!("future path ends at {} before t = {t}", g.end())));
    }
    let n = w.len();
    let anchor = w.raw[(n - 1) * w.dim..].to_vec();
    let mut raw = Vec::with_capacity((n + m) * w.dim);
    raw.extend_from_slice(&w.raw);
    for k in 1..=m {
        raw.extend(future.row(k).iter().zip(&anchor).map(|(f, a)| a + f));
    }
    Ok(NoiseWindow { dt: w.dt, dim: w.dim, raw })
}

/// `R_T w (t) = w(t - T) - w(-T)` on `[0, T]`.
pub fn restrict_shift_r(w: &NoiseWindow, horizon: f64) -> Result<SampledPath> {
    let m = w.steps(horizon)?;
    let n = w.len();
    if m + 1 > n {
        return Err(Error::WindowExhausted { requested: horizon, available: w.horizon() });
    }
    if m == 0 {
        return Err(invalid("restriction horizon must be positive"));
    }
    let start = n - 1 - m;
    let base = &w.raw[start * w.dim..(start + 1) * w.dim];
    let values = w.raw[start * w.dim..]
        .chunks_exact(w.dim)
        .flat_map(|row| row.iter().zip(base).map(|(r, b)| r - b))
        .collect();
    SampledPath::new(Grid::new(0.0, w.dt, m + 1)?, w.dim, values)
}
