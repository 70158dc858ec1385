//! Discrete curvature under the vertex-scaling metric
//! `l_ij = exp(u_i + u_j) * l0_ij`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::Mesh;

/// Metric edge lengths of face `f` as `[l_opposite_0, l_opposite_1, l_opposite_2]`.
fn face_lengths(mesh: &Mesh, u: &[f64], f: usize) -> [f64; 3] {
    let t = mesh.triangle(f);
    let mut l = [0.0; 3];
    for k in 0..3 {
        let a = t[(k + 1) % 3];
        let b = t[(k + 2) % 3];
        l[k] = (u[a] + u[b]).exp() * mesh.edge_length(a, b);
    }
    l
}

fn satisfies_triangle_inequality(l: [f64; 3]) -> bool {
    l[0] < l[1] + l[2] && l[1] < l[0] + l[2] && l[2] < l[0] + l[1]
}

/// Four times the triangle area from its side lengths, stable for slivers.
fn four_area(l: [f64; 3]) -> f64 {
    let mut s = l;
    s.sort_by(|a, b| b.total_cmp(a));
    let (a, b, c) = (s[0], s[1], s[2]);
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    p.max(0.0).sqrt()
}

/// Corner angles and their cotangents for a triangle with side lengths
/// `l` (side `k` opposite corner `k`).
fn corner_angles(l: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let area4 = four_area(l);
    let mut theta = [0.0; 3];
    let mut cot = [0.0; 3];
    for k in 0..3 {
        let a = l[k];
        let b = l[(k + 1) % 3];
        let c = l[(k + 2) % 3];
        let adj = b * b + c * c - a * a;
        theta[k] = area4.atan2(adj);
        cot[k] = adj / area4;
    }
    (theta, cot)
}

/// Checks every face under the metric `u`, reporting the first violation.
pub fn check_metric(mesh: &Mesh, u: &[f64]) -> Result<()> {
    for f in 0..mesh.face_count() {
        if !satisfies_triangle_inequality(face_lengths(mesh, u, f)) {
            return Err(Error::TriangleInequality(f));
        }
    }
    Ok(())
}

/// Vertex angle sums under metric `u`.
pub fn angle_sums(mesh: &Mesh, u: &[f64]) -> Result<Vec<f64>> {
    let mut sums = vec![0.0; mesh.vertex_count()];
    for f in 0..mesh.face_count() {
        let l = face_lengths(mesh, u, f);
        if !satisfies_triangle_inequality(l) {
            return Err(Error::TriangleInequality(f));
        }
        let (theta, _) = corner_angles(l);
        for (k, &v) in mesh.triangle(f).iter().enumerate() {
            sums[v] += theta[k];
        }
    }
    Ok(sums)
}

/// Discrete curvature: `2 pi - angle sum` at interior vertices and
/// `pi - angle sum` (geodesic curvature) on the boundary.
pub fn compute_curvatures(mesh: &Mesh, u: &[f64]) -> Result<Vec<f64>> {
    let boundary = mesh.boundary_vertices();
    let sums = angle_sums(mesh, u)?;
    Ok(sums
        .iter()
        .zip(&boundary)
        .map(|(s, &b)| if b { PI - s } else { 2.0 * PI - s })
        .collect())
}

/// Edge weights `w_ij = sum of cot(angle opposite ij)` over the faces
/// containing edge `ij`, keyed by `(min, max)`.
pub fn edge_weights(mesh: &Mesh, u: &[f64]) -> Result<Vec<((usize, usize), f64)>> {
    let mut triplets = Vec::with_capacity(mesh.face_count() * 3);
    for f in 0..mesh.face_count() {
        let l = face_lengths(mesh, u, f);
        if !satisfies_triangle_inequality(l) {
            return Err(Error::TriangleInequality(f));
        }
        let (_, cot) = corner_angles(l);
        let t = mesh.triangle(f);
        for k in 0..3 {
            let a = t[(k + 1) % 3];
            let b = t[(k + 2) % 3];
            triplets.push(((a.min(b), a.max(b)), cot[k]));
        }
    }
    triplets.sort_by_key(|&(e, _)| e);
    let mut merged: Vec<((usize, usize), f64)> = Vec::with_capacity(triplets.len());
    for (e, w) in triplets {
        match merged.last_mut() {
            Some((last, acc)) if *last == e => *acc += w,
            _ => merged.push((e, w)),
        }
    }
    Ok(merged)
}

/// Jacobian of the curvature, `dK_i/du_j`: `-w_ij` off the diagonal and
/// `sum_j w_ij` on it. Symmetric, with the constant vector in its kernel.
pub fn curvature_jacobian(mesh: &Mesh, u: &[f64]) -> Result<CsrMatrix> {
    let weights = edge_weights(mesh, u)?;
    let mut t = Vec::with_capacity(weights.len() * 4);
    for ((i, j), w) in weights {
        t.push((i, j, -w));
        t.push((j, i, -w));
        t.push((i, i, w));
        t.push((j, j, w));
    }
    Ok(CsrMatrix::from_triplets(mesh.vertex_count(), t))
}

/// Hessian of the Ricci energy, whose gradient is `K_target - K`:
/// `-sum_j w_ij` on the diagonal and `w_ij` off it. This is the negated
/// curvature Jacobian.
pub fn ricci_hessian(mesh: &Mesh, u: &[f64]) -> Result<CsrMatrix> {
    let weights = edge_weights(mesh, u)?;
    let mut t = Vec::with_capacity(weights.len() * 4);
    for ((i, j), w) in weights {
        t.push((i, j, w));
        t.push((j, i, w));
        t.push((i, i, -w));
        t.push((j, j, -w));
    }
    Ok(CsrMatrix::from_triplets(mesh.vertex_count(), t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn flat_grid_curvature() {
        let m = shapes::grid(6, 6);
        let k = compute_curvatures(&m, &vec![0.0; m.vertex_count()]).unwrap();
        let corners = [0, 5, 30, 35];
        let boundary = m.boundary_vertices();
        for v in 0..m.vertex_count() {
            let expected = if corners.contains(&v) { FRAC_PI_2 } else { 0.0 };
            assert!((k[v] - expected).abs() < 1e-12, "vertex {v} (boundary {})", boundary[v]);
        }
    }

    #[test]
    fn cube_corner_has_three_right_angles() {
        let m = shapes::cube();
        let k = compute_curvatures(&m, &[0.0; 8]).unwrap();
        for kv in k {
            assert!((kv - FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_bonnet_on_tetrahedron_for_any_u() {
        let m = shapes::tetrahedron();
        for u in [[0.0; 4], [0.1, -0.05, 0.02, 0.0], [-0.2, 0.1, 0.1, 0.05]] {
            let k = compute_curvatures(&m, &u).unwrap();
            assert!((k.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_inequality_violation_names_the_face() {
        let m = shapes::grid(3, 3);
        let mut u = vec![0.0; 9];
        u[0] = 3.0; // stretches both edges at the corner far beyond the third
        assert!(matches!(
            compute_curvatures(&m, &u),
            Err(Error::TriangleInequality(0))
        ));
    }

    #[test]
    fn hessian_is_symmetric_with_zero_row_sums() {
        let m = shapes::hemisphere_cap(4);
        let u: Vec<f64> = (0..m.vertex_count()).map(|i| 0.01 * (i as f64).sin()).collect();
        let h = ricci_hessian(&m, &u).unwrap();
        for i in 0..h.dim() {
            let s: f64 = h.row(i).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-12);
            for (j, v) in h.row(i) {
                assert!((h.get(j, i) - v).abs() < 1e-15);
            }
        }
    }

    /// Central differences of K against the analytic energy Hessian, which
    /// is `-dK/du`.
    #[test]
    fn hessian_matches_finite_differences() {
        let m = shapes::hemisphere_cap(3); // 37 vertices
        assert!(m.vertex_count() <= 50);
        let n = m.vertex_count();
        let u: Vec<f64> = (0..n).map(|i| 0.05 * ((i * 7 % 11) as f64 / 11.0 - 0.5)).collect();
        let h = ricci_hessian(&m, &u).unwrap().to_dense();
        let step = 1e-6;
        for j in 0..n {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[j] += step;
            dn[j] -= step;
            let kp = compute_curvatures(&m, &up).unwrap();
            let km = compute_curvatures(&m, &dn).unwrap();
            for i in 0..n {
                let fd = -(kp[i] - km[i]) / (2.0 * step);
                let exact = h[i][j];
                let ok = if exact == 0.0 {
                    fd.abs() <= 1e-8
                } else {
                    (fd - exact).abs() <= 1e-4 * exact.abs()
                };
                assert!(
                    ok,
                    "H[{i}][{j}] = {exact}, finite difference {fd}"
                );
            }
        }
    }
}
