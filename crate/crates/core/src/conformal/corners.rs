//! Choice and validation of the four boundary vertices pinned to the
//! square's corners.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::mesh::{validate_topology, Mesh};

/// The single boundary loop of a disk mesh.
fn disk_boundary(mesh: &Mesh) -> Result<Vec<usize>> {
    let report = validate_topology(mesh);
    if !report.is_disk {
        return Err(Error::Topology(format!(
            "expected a disk (chi = 1, one boundary loop), got chi = {} with {} loops",
            report.euler_characteristic, report.boundary_loops
        )));
    }
    let boundary = mesh.boundary_loops().swap_remove(0);
    if boundary.len() < 4 {
        return Err(Error::InvalidCorners(format!(
            "boundary has only {} vertices",
            boundary.len()
        )));
    }
    Ok(boundary)
}

/// Boundary vertices nearest to the quarter points of the boundary by arc
/// length, starting from the loop's first vertex.
pub fn default_corners(mesh: &Mesh) -> Result<[usize; 4]> {
    let boundary = disk_boundary(mesh)?;
    let n = boundary.len();
    let mut arc = Vec::with_capacity(n);
    let mut total = 0.0;
    for k in 0..n {
        arc.push(total);
        total += mesh.edge_length(boundary[k], boundary[(k + 1) % n]);
    }
    let mut picks = [0usize; 4];
    for q in 1..4 {
        let target = total * q as f64 / 4.0;
        // keep room for the remaining corners so picks stay strictly increasing
        let lo = picks[q - 1] + 1;
        let hi = n - (3 - q);
        picks[q] = (lo..hi)
            .min_by(|&a, &b| (arc[a] - target).abs().total_cmp(&(arc[b] - target).abs()))
            .unwrap_or(lo);
    }
    Ok(picks.map(|k| boundary[k]))
}

/// Checks that `corners` are four distinct vertices of the boundary loop
/// in loop order, and returns the boundary loop rotated to start at
/// `corners[0]` together with the loop positions of the four corners.
pub fn boundary_from_corners(mesh: &Mesh, corners: [usize; 4]) -> Result<(Vec<usize>, [usize; 4])> {
    let mut boundary = disk_boundary(mesh)?;
    let n = boundary.len();
    let mut at = [0usize; 4];
    for (slot, &c) in at.iter_mut().zip(&corners) {
        *slot = boundary
            .iter()
            .position(|&v| v == c)
            .ok_or_else(|| Error::InvalidCorners(format!("vertex {c} is not on the boundary")))?;
    }
    boundary.rotate_left(at[0]);
    let rel = at.map(|p| (p + n - at[0]) % n);
    if !(rel[0] < rel[1] && rel[1] < rel[2] && rel[2] < rel[3]) {
        return Err(Error::InvalidCorners(format!(
            "corners {corners:?} are repeated or not in boundary order"
        )));
    }
    Ok((boundary, rel))
}

/// Target curvature: `pi/2` at the four corners and zero everywhere else.
pub fn target_curvatures(mesh: &Mesh, corners: [usize; 4]) -> Result<Vec<f64>> {
    boundary_from_corners(mesh, corners)?;
    let mut k = vec![0.0; mesh.vertex_count()];
    for c in corners {
        k[c] = FRAC_PI_2;
    }
    Ok(k)
}
