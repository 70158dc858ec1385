use super::Mesh;
use crate::error::{Error, Result};
use crate::geom::{add3, normalize3, Vec3};

/// Lumped per-vertex area measure and area-weighted vertex normals.
#[derive(Debug, Clone)]
pub struct VertexMeasure {
    /// One third of the incident triangle areas, normalized to sum to one.
    pub nu: Vec<f64>,
    pub normals: Vec<Vec3>,
}

pub fn vertex_measures(mesh: &Mesh) -> Result<VertexMeasure> {
    let n = mesh.vertex_count();
    let mut mass = vec![0.0; n];
    let mut normals = vec![[0.0; 3]; n];
    for (f, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.face_area(f) / 3.0;
        let weighted = mesh.face_normal_weighted(f);
        for &v in tri {
            mass[v] += a;
            normals[v] = add3(normals[v], weighted);
        }
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroArea);
    }
    if let Some(v) = mass.iter().position(|&m| m <= 0.0) {
        return Err(Error::IsolatedVertex(v));
    }
    let mut nu: Vec<f64> = mass.iter().map(|m| m / total).collect();
    // One correction pass pulls the sum to 1 to within a couple of ulps.
    let s: f64 = nu.iter().sum();
    let drift = (s - 1.0) / n as f64;
    for x in &mut nu {
        *x -= drift;
    }
    let normals = normals.into_iter().map(normalize3).collect();
    Ok(VertexMeasure { nu, normals })
}
