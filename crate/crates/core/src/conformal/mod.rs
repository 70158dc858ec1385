//! Conformal flattening of a disk onto the unit square by discrete Ricci
//! flow, plus the Tutte and harmonic baselines.

mod baseline;
mod corners;
pub mod curvature;
mod layout;
mod ricci;

pub use baseline::{baseline_parameterize, Weights, RESIDUAL_TOLERANCE};
pub use corners::{boundary_from_corners, default_corners, target_curvatures};
pub use curvature::{compute_curvatures, curvature_jacobian, ricci_hessian};
pub use layout::{develop, layout_to_square, SIDE_TOLERANCE};
pub use ricci::{ricci_flow, RicciIteration, RicciOptions, RicciSolution};

use crate::error::Result;
use crate::mesh::Mesh;
use crate::param::ParamMap;

/// Ricci flow to a flat metric with right-angle corners, then layout.
pub fn conformal_parameterize(
    mesh: &Mesh,
    corners: [usize; 4],
    opts: &RicciOptions,
) -> Result<(ParamMap, RicciSolution)> {
    let target = target_curvatures(mesh, corners)?;
    let solution = ricci_flow(mesh, &target, opts)?;
    let map = layout_to_square(mesh, &solution.u, corners)?;
    Ok((map, solution))
}
