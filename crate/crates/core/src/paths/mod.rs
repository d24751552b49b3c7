//! Path containers, grids, norms and the shift/concatenation algebra of the
//! noise space.

mod grid;
mod io;
mod norms;
mod path;
mod window;

pub use grid::Grid;
pub use io::{read_bin, read_csv, write_bin, write_csv, PathFormat};
pub(crate) use io::write_csv_with_header;
pub use norms::{
    holder_seminorm, holder_seminorm_component, weighted_holder_norm, weighted_norm,
    weighted_norm_component, HolderParams,
};
pub use path::SampledPath;
pub use window::{concat_m, restrict_shift_r, shift_theta, NoiseWindow};

/// Default truncation horizon of the past, in time units.
pub const DEFAULT_T_PAST: f64 = 64.0;

/// Relative tolerance used when checking that a time is a grid multiple.
pub(crate) const GRID_TOL: f64 = 1e-9;

/// Number of whole steps of size `dt` in `t`, if `t` is a grid multiple.
pub(crate) fn grid_steps(t: f64, dt: f64) -> Option<usize> {
    if !(t.is_finite() && t >= 0.0) {
        return None;
    }
    let k = (t / dt).round();
    if (t / dt - k).abs() <= GRID_TOL * k.max(1.0) {
        Some(k as usize)
    } else {
        None
    }
}

pub(crate) fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

pub(crate) fn grid_steps_of(t: f64, dt: f64) -> crate::Result<usize> {
    grid_steps(t, dt).ok_or_else(|| crate::error::invalid(format!("{t} is not a multiple of dt = {dt}")))
}
