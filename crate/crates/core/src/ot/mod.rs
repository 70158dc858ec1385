//! Semi-discrete optimal transport from the uniform unit square to a
//! weighted point set, solved by damped Newton on the heights of a power
//! diagram.

mod diagram;
mod solve;

pub use diagram::{power_diagram, Cell, PowerDiagram, PowerEdge};
pub use solve::{
    area_preserving_uv, ot_energy, ot_energy_of, ot_gradient, ot_hessian, solve_ot, write_log_csv, OtIteration,
    OtOptions, OtSolution,
};

use crate::error::{Error, Result};
use crate::geom::{dot2, Vec2};

/// Target points and their masses.
#[derive(Debug, Clone)]
pub struct OtProblem {
    sites: Vec<Vec2>,
    nu: Vec<f64>,
}

impl OtProblem {
    /// Sites must be distinct points of the unit square; masses positive
    /// and summing to one.
    pub fn new(sites: Vec<Vec2>, nu: Vec<f64>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Invalid("no sites".into()));
        }
        if sites.len() != nu.len() {
            return Err(Error::Invalid(format!(
                "{} sites but {} masses",
                sites.len(),
                nu.len()
            )));
        }
        if let Some(i) = sites
            .iter()
            .position(|p| !((0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1])))
        {
            return Err(Error::Invalid(format!("site {i} lies outside the unit square")));
        }
        if let Some(i) = nu.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::Invalid(format!("mass {i} is not positive")));
        }
        let total: f64 = nu.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("masses sum to {total}, expected 1")));
        }
        if let Some((i, j)) = diagram::find_duplicate(&sites) {
            return Err(Error::DuplicateSites(i, j));
        }
        Ok(OtProblem { sites, nu })
    }

    pub fn sites(&self) -> &[Vec2] {
        &self.sites
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Heights whose power diagram is the Voronoi diagram of the sites.
    pub fn voronoi_heights(&self) -> Vec<f64> {
        self.sites.iter().map(|p| -0.5 * dot2(*p, *p)).collect()
    }
}
