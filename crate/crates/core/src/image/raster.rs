use std::collections::VecDeque;

use super::{check_power_of_two, GeometryImage, ImageMeta};
use crate::error::{Error, Result};
use crate::geom::{normalize3, orient2, Vec2, Vec3};
use crate::mesh::{vertex_measures, Mesh};
use crate::param::ParamMap;

/// Barycentric coordinates may dip this far below zero and still count as
/// inside, so pixel centers on shared edges are never lost to rounding.
const INSIDE_SLACK: f64 = 1e-12;

/// Samples positions and vertex normals at every pixel center covered by a
/// UV triangle (the first in face order wins), then fills the rest from
/// the nearest covered pixel.
pub fn rasterize(mesh: &Mesh, map: &ParamMap, resolution: usize, source: &str) -> Result<GeometryImage> {
    check_power_of_two(resolution)?;
    map.check_orientation(mesh)?;
    let (lo, hi) = mesh.bbox().ok_or(Error::ZeroArea)?;
    let meta = ImageMeta {
        bbox_min: lo,
        bbox_max: hi,
        resolution,
        level: 0,
        source: source.to_string(),
    };
    let vertex_normals = vertex_measures(mesh)?.normals;
    let n = resolution * resolution;
    let mut positions = vec![[0.0; 3]; n];
    let mut normals = vec![[0.0; 3]; n];
    let mut coverage = vec![false; n];
    let res = resolution as f64;
    // pixel index whose center is the first at or above coordinate t
    let first_at = |t: f64| ((t * res - 0.5).ceil().max(0.0) as usize).min(resolution);
    let last_at = |t: f64| {
        let x = (t * res - 0.5).floor();
        if x < 0.0 {
            None
        } else {
            Some((x as usize).min(resolution - 1))
        }
    };
    for t in mesh.triangles() {
        let uv: [Vec2; 3] = t.map(|v| map.uv[v]);
        let area = orient2(uv[0], uv[1], uv[2]);
        let (umin, umax) = min_max(uv.map(|p| p[0]));
        let (vmin, vmax) = min_max(uv.map(|p| p[1]));
        let (Some(c1), Some(r1)) = (last_at(umax + 1e-12), last_at(vmax + 1e-12)) else {
            continue;
        };
        let c0 = first_at(umin - 1e-12);
        let r0 = first_at(vmin - 1e-12);
        for row in r0..=r1 {
            let y = (row as f64 + 0.5) / res;
            for col in c0..=c1 {
                let idx = row * resolution + col;
                if coverage[idx] {
                    continue;
                }
                let q = [(col as f64 + 0.5) / res, y];
                let b = [
                    orient2(q, uv[1], uv[2]) / area,
                    orient2(uv[0], q, uv[2]) / area,
                    orient2(uv[0], uv[1], q) / area,
                ];
                if b.iter().any(|&x| x < -INSIDE_SLACK) {
                    continue;
                }
                let p = blend(b, t.map(|v| mesh.position(v)));
                positions[idx] = meta.normalize(p);
                normals[idx] = normalize3(blend(b, t.map(|v| vertex_normals[v])));
                coverage[idx] = true;
            }
        }
    }
    if !coverage.iter().any(|&c| c) {
        return Err(Error::Image("no pixel center is covered by the uv map".into()));
    }
    let mut image = GeometryImage {
        meta,
        positions,
        normals: Some(normals),
        coverage,
    };
    fill_uncovered(&mut image);
    Ok(image)
}

fn min_max(x: [f64; 3]) -> (f64, f64) {
    (x[0].min(x[1]).min(x[2]), x[0].max(x[1]).max(x[2]))
}

fn blend(b: [f64; 3], p: [Vec3; 3]) -> Vec3 {
    [0, 1, 2].map(|k| b[0] * p[0][k] + b[1] * p[1][k] + b[2] * p[2][k])
}

/// Copies every uncovered pixel from the nearest covered one in 4-neighbour
/// steps, breaking ties in favour of sources earlier in row-major order.
/// The coverage mask is left untouched, so the fill is idempotent.
pub fn fill_uncovered(image: &mut GeometryImage) {
    let res = image.meta.resolution;
    let mut done = image.coverage.clone();
    let mut queue: VecDeque<usize> = (0..res * res).filter(|&i| done[i]).collect();
    while let Some(i) = queue.pop_front() {
        let (row, col) = (i / res, i % res);
        let mut nbrs = [None; 4];
        if row > 0 {
            nbrs[0] = Some(i - res);
        }
        if col > 0 {
            nbrs[1] = Some(i - 1);
        }
        if col + 1 < res {
            nbrs[2] = Some(i + 1);
        }
        if row + 1 < res {
            nbrs[3] = Some(i + res);
        }
        for j in nbrs.into_iter().flatten() {
            if !done[j] {
                done[j] = true;
                image.positions[j] = image.positions[i];
                if let Some(n) = image.normals.as_mut() {
                    n[j] = n[i];
                }
                queue.push_back(j);
            }
        }
    }
}
