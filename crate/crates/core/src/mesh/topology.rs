use serde::{Deserialize, Serialize};

use super::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub euler_characteristic: i64,
    pub boundary_loops: usize,
    pub genus: i64,
    pub is_disk: bool,
}

impl TopologyReport {
    /// Closed surface of genus zero.
    pub fn is_sphere(&self) -> bool {
        self.euler_characteristic == 2 && self.boundary_loops == 0
    }
}

/// Euler characteristic, boundary loop count and genus of a connected mesh.
///
/// Genus is `(2 - chi - loops) / 2`; for disconnected input it is whatever
/// that formula yields and `is_disk` is false whenever it does not hold.
pub fn validate_topology(mesh: &Mesh) -> TopologyReport {
    let v = mesh.vertex_count() as i64;
    let e = mesh.edge_count() as i64;
    let f = mesh.face_count() as i64;
    let chi = v - e + f;
    let loops = mesh.boundary_loops().len();
    let genus = (2 - chi - loops as i64).div_euclid(2);
    TopologyReport {
        euler_characteristic: chi,
        boundary_loops: loops,
        genus,
        is_disk: chi == 1 && loops == 1,
    }
}
