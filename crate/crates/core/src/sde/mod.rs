//! Pathwise solution of SDEs driven by Hölder paths of exponent above 1/2.

mod flows;
mod model;
mod sds;
mod solver;

use std::io::Write;

pub use flows::{jacobian_flow, jacobian_inverse_flow, noise_derivative, NoiseDerivative};
pub use model::{DoubleWellModel, Dynamics, HypothesisReport, LinearModel, ModelConstants, ModelSpec, PlanarModel};
pub use sds::{cocycle_defect, sds_lambda, sds_lambda_stepped};
pub use solver::{
    holder_exponent_estimate, solve_endpoint_stepped, solve_sde, solve_sde_with, young_integral, SolveOptions,
    Trajectory, YoungIntegral, DIVERGENCE_BOUND,
};

pub(crate) use solver::{least_squares_slope, matmul};

use crate::error::Result;
use crate::paths::SampledPath;

impl Trajectory {
    /// CSV with columns `time, x_1..x_d` followed by `J_ij` (row-major) when present.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.state.dim();
        let mut names: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
        let combined = match &self.jacobian {
            Some(j) => {
                for i in 1..=d {
                    for k in 1..=d {
                        names.push(format!("J_{i}{k}"));
                    }
                }
                let mut comps: Vec<Vec<f64>> = (0..d).map(|i| self.state.component(i)).collect();
                comps.extend((0..d * d).map(|i| j.component(i)));
                SampledPath::from_components(*self.state.grid(), &comps)?
            }
            None => self.state.clone(),
        };
        crate::paths::write_csv_with_header(&combined, &names, out)
    }
}
