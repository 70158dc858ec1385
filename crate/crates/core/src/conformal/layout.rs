//! Planar development of a flat metric and normalization to the unit square.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geom::{norm2, orient2, sub2, Vec2};
use crate::mesh::Mesh;
use crate::param::{ParamMap, Stage};

use super::corners::boundary_from_corners;

/// Largest distance a boundary vertex may sit from its square side before
/// snapping, in unit-square coordinates.
pub const SIDE_TOLERANCE: f64 = 1e-3;

fn metric_length(mesh: &Mesh, u: &[f64], a: usize, b: usize) -> f64 {
    (u[a] + u[b]).exp() * mesh.edge_length(a, b)
}

/// Apex of the triangle over the directed edge `a -> b` (on its left) with
/// metric side lengths `l_ab`, `l_bc`, `l_ca`.
fn apex(a: Vec2, b: Vec2, l_ab: f64, l_bc: f64, l_ca: f64) -> Vec2 {
    let cos_a = ((l_ab * l_ab + l_ca * l_ca - l_bc * l_bc) / (2.0 * l_ab * l_ca)).clamp(-1.0, 1.0);
    let sin_a = (1.0 - cos_a * cos_a).sqrt();
    let d = sub2(b, a);
    let len = norm2(d);
    let e = [d[0] / len, d[1] / len];
    let perp = [-e[1], e[0]];
    [
        a[0] + l_ca * (cos_a * e[0] + sin_a * perp[0]),
        a[1] + l_ca * (cos_a * e[1] + sin_a * perp[1]),
    ]
}

/// Lays the mesh out in the plane with metric lengths `exp(u_i + u_j) l_ij`,
/// unfolding faces breadth-first across interior edges from face 0. Face 0
/// has its first vertex at the origin and its second on the +x axis. Each
/// vertex keeps the position from the first face that places it.
pub fn develop(mesh: &Mesh, u: &[f64]) -> Result<Vec<Vec2>> {
    let n = mesh.vertex_count();
    if u.len() != n {
        return Err(Error::Invalid(format!("{} conformal factors for {n} vertices", u.len())));
    }
    if mesh.face_count() == 0 {
        return Err(Error::Layout("mesh has no faces".into()));
    }
    let mut pos: Vec<Option<Vec2>> = vec![None; n];
    let mut placed_face = vec![false; mesh.face_count()];
    let t0 = mesh.triangle(0);
    let l01 = metric_length(mesh, u, t0[0], t0[1]);
    pos[t0[0]] = Some([0.0, 0.0]);
    pos[t0[1]] = Some([l01, 0.0]);
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    placed_face[0] = true;
    while let Some((f, k)) = queue.pop_front() {
        // edge k of face f (from corner k to corner k+1) already has both ends
        let t = mesh.triangle(f);
        let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
        let pa = pos[a].expect("shared edge placed");
        let pb = pos[b].expect("shared edge placed");
        if pos[c].is_none() {
            let l_ab = metric_length(mesh, u, a, b);
            let l_bc = metric_length(mesh, u, b, c);
            let l_ca = metric_length(mesh, u, c, a);
            pos[c] = Some(apex(pa, pb, l_ab, l_bc, l_ca));
        }
        for j in 0..3 {
            let h = 3 * f + j;
            if let Some(tw) = mesh.twin(h) {
                let g = mesh.face_of(tw);
                if !placed_face[g] {
                    placed_face[g] = true;
                    queue.push_back((g, tw % 3));
                }
            }
        }
    }
    pos.into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or_else(|| Error::Layout(format!("vertex {v} is not reachable from face 0"))))
        .collect()
}

/// Develops the flat metric `u` and maps it onto the unit square with
/// `corners` at (0,0), (1,0), (1,1), (0,1).
///
/// A similarity places the first corner at the origin and the second at
/// (1,0); the v axis is then rescaled so the fourth corner lands at v = 1,
/// which is the identity when the developed rectangle is already square.
/// Boundary vertices are snapped onto their sides.
pub fn layout_to_square(mesh: &Mesh, u: &[f64], corners: [usize; 4]) -> Result<ParamMap> {
    let (boundary, at) = boundary_from_corners(mesh, corners)?;
    let raw = develop(mesh, u)?;
    let origin = raw[corners[0]];
    let axis = sub2(raw[corners[1]], origin);
    let scale = norm2(axis);
    if !(scale > 0.0) {
        return Err(Error::Layout("first two corners coincide".into()));
    }
    let (cos, sin) = (axis[0] / scale, axis[1] / scale);
    let mut uv: Vec<Vec2> = raw
        .iter()
        .map(|p| {
            let d = sub2(*p, origin);
            [(cos * d[0] + sin * d[1]) / scale, (-sin * d[0] + cos * d[1]) / scale]
        })
        .collect();
    let height = uv[corners[3]][1];
    if !(height > 0.0) {
        return Err(Error::Layout("corners are not laid out counter-clockwise".into()));
    }
    for p in &mut uv {
        p[1] /= height;
    }

    // each side: loop positions at[s]..=at[s+1], pinned coordinate
    let n = boundary.len();
    let mut worst = 0.0f64;
    for side in 0..4 {
        let start = at[side];
        let end = if side == 3 { n } else { at[side + 1] };
        for k in start..=end {
            let p = &mut uv[boundary[k % n]];
            let (axis, value) = match side {
                0 => (1, 0.0),
                1 => (0, 1.0),
                2 => (1, 1.0),
                _ => (0, 0.0),
            };
            worst = worst.max((p[axis] - value).abs());
            p[axis] = value;
        }
    }
    if worst > SIDE_TOLERANCE {
        return Err(Error::Layout(format!(
            "boundary deviates {worst:e} from the square; curvature residual too large"
        )));
    }
    for p in &mut uv {
        p[0] = p[0].clamp(0.0, 1.0);
        p[1] = p[1].clamp(0.0, 1.0);
    }
    for (f, t) in mesh.triangles().iter().enumerate() {
        if !(orient2(uv[t[0]], uv[t[1]], uv[t[2]]) > 0.0) {
            return Err(Error::FlippedTriangle(f));
        }
    }
    Ok(ParamMap {
        uv,
        stage: Stage::Conformal,
        corners,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn flat_grid_lays_out_to_itself() {
        let m = shapes::grid(9, 9);
        let map = layout_to_square(&m, &vec![0.0; 81], [0, 8, 80, 72]).unwrap();
        for (v, p) in map.uv.iter().enumerate() {
            let q = m.position(v);
            assert!((p[0] - q[0]).abs() <= 1e-9 && (p[1] - q[1]).abs() <= 1e-9, "vertex {v}");
        }
        assert_eq!(map.uv[0], [0.0, 0.0]);
        assert_eq!(map.uv[8], [1.0, 0.0]);
        assert_eq!(map.uv[80], [1.0, 1.0]);
        assert_eq!(map.uv[72], [0.0, 1.0]);
    }

    #[test]
    fn develop_keeps_metric_lengths() {
        let m = shapes::grid(5, 5);
        let u: Vec<f64> = vec![0.25; 25];
        let p = develop(&m, &u).unwrap();
        for [a, b] in m.edges() {
            let d = norm2(sub2(p[a], p[b]));
            assert!((d - 0.5f64.exp() * m.edge_length(a, b)).abs() < 1e-12);
        }
    }

    #[test]
    fn curved_metric_is_rejected() {
        let m = shapes::hemisphere_cap(4);
        let corners = super::super::default_corners(&m).unwrap();
        let err = layout_to_square(&m, &vec![0.0; m.vertex_count()], corners).unwrap_err();
        assert!(matches!(err, Error::Layout(_) | Error::FlippedTriangle(_)), "{err}");
    }
}
