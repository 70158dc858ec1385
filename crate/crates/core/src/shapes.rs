//! Procedural test surfaces.
//!
//! All generators return consistently oriented meshes whose normals point
//! toward +z (open patches) or outward (closed surfaces).

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::geom::{normalize3, Vec3};
use crate::mesh::Mesh;

fn build(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Mesh {
    Mesh::new(positions, triangles).expect("generated mesh is valid")
}

/// Flat `nx` x `ny` vertex grid over the unit square at z = 0, vertex
/// `j * nx + i` at `(i / (nx - 1), j / (ny - 1))`, every cell split along
/// the same diagonal.
pub fn grid(nx: usize, ny: usize) -> Mesh {
    height_field(nx, ny, |_, _| 0.0)
}

/// Grid with cell diagonals alternating by checkerboard parity. For odd `n`
/// the triangulation is invariant under quarter turns about the center.
pub fn grid_symmetric(n: usize) -> Mesh {
    assert!(n >= 2);
    let positions = grid_positions(n, n, |_, _| 0.0);
    let mut triangles = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let a = j * n + i;
            let b = a + 1;
            let c = a + n + 1;
            let d = a + n;
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    build(positions, triangles)
}

fn grid_positions(nx: usize, ny: usize, z: impl Fn(f64, f64) -> f64) -> Vec<Vec3> {
    let mut positions = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = i as f64 / (nx - 1) as f64;
            let y = j as f64 / (ny - 1) as f64;
            positions.push([x, y, z(x, y)]);
        }
    }
    positions
}

/// Unit-square grid lifted by `z(x, y)`.
pub fn height_field(nx: usize, ny: usize, z: impl Fn(f64, f64) -> f64) -> Mesh {
    assert!(nx >= 2 && ny >= 2);
    let positions = grid_positions(nx, ny, z);
    let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            triangles.push([a, a + 1, a + nx + 1]);
            triangles.push([a, a + nx + 1, a + nx]);
        }
    }
    build(positions, triangles)
}

/// Flat patch with a narrow Gaussian bump: most of the surface area sits in
/// a small part of the parameter domain.
pub fn bump(n: usize, height: f64, sigma: f64) -> Mesh {
    height_field(n, n, |x, y| {
        let dx = x - 0.5;
        let dy = y - 0.5;
        height * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
    })
}

/// Gentle two-frequency wave over the unit square.
pub fn wave(n: usize, amplitude: f64) -> Mesh {
    height_field(n, n, |x, y| {
        amplitude * ((2.0 * PI * x).sin() * (PI * y).cos() + 0.5 * (3.0 * PI * x * y).sin())
    })
}

/// Upper unit hemisphere (z >= 0) built from hexagonal rings: a pole vertex
/// and `6 r` vertices on ring `r`, the last ring on the equator.
/// `1 + 3 R (R + 1)` vertices in total.
pub fn hemisphere_cap(rings: usize) -> Mesh {
    spherical_cap(rings, FRAC_PI_2)
}

/// Spherical cap of polar half-angle `theta_max`, hexagonal ring layout.
pub fn spherical_cap(rings: usize, theta_max: f64) -> Mesh {
    assert!(rings >= 1);
    let mut positions = vec![[0.0, 0.0, 1.0]];
    let mut ring_start = vec![0usize];
    for r in 1..=rings {
        ring_start.push(positions.len());
        let theta = theta_max * r as f64 / rings as f64;
        let count = 6 * r;
        for j in 0..count {
            let phi = 2.0 * PI * j as f64 / count as f64;
            positions.push([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
        }
    }
    let mut triangles = Vec::new();
    for r in 1..=rings {
        let outer = ring_start[r];
        let n_out = 6 * r;
        if r == 1 {
            for o in 0..n_out {
                triangles.push([0, outer + o, outer + (o + 1) % n_out]);
            }
            continue;
        }
        let inner = ring_start[r - 1];
        let n_in = 6 * (r - 1);
        let (mut i, mut o) = (0, 0);
        while i < n_in || o < n_out {
            let advance_outer = if i == n_in {
                true
            } else if o == n_out {
                false
            } else {
                (o + 1) * n_in <= (i + 1) * n_out
            };
            if advance_outer {
                triangles.push([inner + i % n_in, outer + o, outer + (o + 1) % n_out]);
                o += 1;
            } else {
                triangles.push([inner + i, outer + o % n_out, inner + (i + 1) % n_in]);
                i += 1;
            }
        }
    }
    build(positions, triangles)
}

/// Regular tetrahedron-like closed surface with outward normals.
pub fn tetrahedron() -> Mesh {
    build(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]],
    )
}

/// Closed unit cube, two triangles per side, outward normals.
pub fn cube() -> Mesh {
    let positions = (0..8)
        .map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64])
        .collect();
    let quads = [
        [0, 2, 3, 1], // z = 0
        [4, 5, 7, 6], // z = 1
        [0, 1, 5, 4], // y = 0
        [2, 6, 7, 3], // y = 1
        [0, 4, 6, 2], // x = 0
        [1, 3, 7, 5], // x = 1
    ];
    let mut triangles = Vec::new();
    for q in quads {
        triangles.push([q[0], q[1], q[2]]);
        triangles.push([q[0], q[2], q[3]]);
    }
    build(positions, triangles)
}

/// Unit icosphere: an icosahedron with `subdivisions` rounds of midpoint
/// subdivision, projected to the sphere. `10 * 4^s + 2` vertices.
pub fn icosphere(subdivisions: usize) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize3)
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, positions: &mut Vec<Vec3>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let pa = positions[a];
                let pb = positions[b];
                positions.push(normalize3([
                    pa[0] + pb[0],
                    pa[1] + pb[1],
                    pa[2] + pb[2],
                ]));
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for [a, b, c] in triangles {
            let ab = mid(a, b, &mut positions);
            let bc = mid(b, c, &mut positions);
            let ca = mid(c, a, &mut positions);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }
    build(positions, triangles)
}

/// Torus with `nu` segments around the main circle and `nv` around the tube.
pub fn torus(nu: usize, nv: usize, major: f64, minor: f64) -> Mesh {
    let mut positions = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let a = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let b = 2.0 * PI * j as f64 / nv as f64;
            let r = major + minor * b.cos();
            positions.push([r * a.cos(), r * a.sin(), minor * b.sin()]);
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + j % nv;
    let mut triangles = Vec::new();
    for i in 0..nu {
        for j in 0..nv {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    build(positions, triangles)
}

/// Flat annulus between radii 0.5 and 1.
pub fn annulus(segments: usize, rings: usize) -> Mesh {
    let mut positions = Vec::new();
    for r in 0..=rings {
        let rad = 0.5 + 0.5 * r as f64 / rings as f64;
        for s in 0..segments {
            let a = 2.0 * PI * s as f64 / segments as f64;
            positions.push([rad * a.cos(), rad * a.sin(), 0.0]);
        }
    }
    let idx = |r: usize, s: usize| r * segments + s % segments;
    let mut triangles = Vec::new();
    for r in 0..rings {
        for s in 0..segments {
            triangles.push([idx(r, s), idx(r, s + 1), idx(r + 1, s + 1)]);
            triangles.push([idx(r, s), idx(r + 1, s + 1), idx(r + 1, s)]);
        }
    }
    build(positions, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_topology;

    #[test]
    fn hemisphere_vertex_count_and_orientation() {
        let m = hemisphere_cap(25);
        assert_eq!(m.vertex_count(), 1 + 3 * 25 * 26);
        assert!(validate_topology(&m).is_disk);
        for f in 0..m.face_count() {
            let n = m.face_normal_weighted(f);
            let c = m.triangle(f).map(|v| m.position(v));
            let centroid: Vec<f64> = (0..3).map(|k| c[0][k] + c[1][k] + c[2][k]).collect();
            let outward = n[0] * centroid[0] + n[1] * centroid[1] + n[2] * centroid[2];
            assert!(outward > 0.0, "face {f} points inward");
        }
    }

    #[test]
    fn closed_shapes_are_spheres() {
        for m in [tetrahedron(), cube(), icosphere(1)] {
            assert!(validate_topology(&m).is_sphere());
        }
    }
}
