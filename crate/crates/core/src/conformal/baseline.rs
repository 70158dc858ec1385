//! Fixed-boundary linear parameterizations: Tutte (uniform weights) and
//! harmonic (cotangent weights).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::{cross3, dot3, norm3, sub3, Vec2};
use crate::linalg::{solve_cg, CsrMatrix};
use crate::mesh::Mesh;
use crate::param::{ParamMap, Stage};

use super::corners::boundary_from_corners;

/// Largest interior equation residual accepted, relative to the row's
/// total weight.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weights {
    Uniform,
    Harmonic,
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weights::Uniform => "uniform",
            Weights::Harmonic => "harmonic",
        })
    }
}

impl FromStr for Weights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Weights::Uniform),
            "harmonic" => Ok(Weights::Harmonic),
            other => Err(Error::Invalid(format!("unknown weighting {other:?}"))),
        }
    }
}

/// Symmetric edge weights keyed by `(min, max)`.
fn edge_weights(mesh: &Mesh, weights: Weights) -> Vec<((usize, usize), f64)> {
    let mut w: Vec<((usize, usize), f64)> = Vec::new();
    match weights {
        Weights::Uniform => {
            for [a, b] in mesh.edges() {
                w.push(((a.min(b), a.max(b)), 1.0));
            }
        }
        Weights::Harmonic => {
            for t in mesh.triangles() {
                for k in 0..3 {
                    let o = mesh.position(t[k]);
                    let a = t[(k + 1) % 3];
                    let b = t[(k + 2) % 3];
                    let ea = sub3(mesh.position(a), o);
                    let eb = sub3(mesh.position(b), o);
                    let cot = dot3(ea, eb) / norm3(cross3(ea, eb));
                    w.push(((a.min(b), a.max(b)), 0.5 * cot));
                }
            }
        }
    }
    w.sort_by_key(|&(e, _)| e);
    let mut merged: Vec<((usize, usize), f64)> = Vec::with_capacity(w.len());
    for (e, x) in w {
        match merged.last_mut() {
            Some((last, acc)) if *last == e => *acc += x,
            _ => merged.push((e, x)),
        }
    }
    merged
}

/// Boundary positions on the square: each side between consecutive corners
/// is parameterized by arc length.
fn square_boundary(mesh: &Mesh, boundary: &[usize], at: [usize; 4]) -> Vec<(usize, Vec2)> {
    let n = boundary.len();
    let mut out = Vec::with_capacity(n);
    for side in 0..4 {
        let start = at[side];
        let end = if side == 3 { n } else { at[side + 1] };
        let mut arc = vec![0.0];
        for k in start..end {
            let l = mesh.edge_length(boundary[k], boundary[(k + 1) % n]);
            arc.push(arc.last().unwrap() + l);
        }
        let total = *arc.last().unwrap();
        for (i, k) in (start..end).enumerate() {
            let t = arc[i] / total;
            let p = match side {
                0 => [t, 0.0],
                1 => [1.0, t],
                2 => [1.0 - t, 1.0],
                _ => [0.0, 1.0 - t],
            };
            out.push((boundary[k], p));
        }
    }
    out
}

/// Maps the boundary onto the unit square by arc length with `corners` at
/// (0,0), (1,0), (1,1), (0,1) and solves for interior positions that are
/// weighted averages of their neighbours.
pub fn baseline_parameterize(mesh: &Mesh, weights: Weights, corners: [usize; 4]) -> Result<ParamMap> {
    let (boundary, at) = boundary_from_corners(mesh, corners)?;
    let n = mesh.vertex_count();
    let mut uv = vec![[0.0; 2]; n];
    let mut fixed = vec![false; n];
    for (v, p) in square_boundary(mesh, &boundary, at) {
        uv[v] = p;
        fixed[v] = true;
    }
    let mut index = vec![usize::MAX; n];
    let interior: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
    for (i, &v) in interior.iter().enumerate() {
        index[v] = i;
    }

    let w = edge_weights(mesh, weights);
    let m = interior.len();
    let mut triplets = Vec::new();
    let mut rhs = vec![[0.0; 2]; m];
    let mut row_weight = vec![0.0; m];
    for &((a, b), x) in &w {
        for (i, j) in [(a, b), (b, a)] {
            if fixed[i] {
                continue;
            }
            let r = index[i];
            triplets.push((r, r, x));
            row_weight[r] += x.abs();
            if fixed[j] {
                rhs[r][0] += x * uv[j][0];
                rhs[r][1] += x * uv[j][1];
            } else {
                triplets.push((r, index[j], -x));
            }
        }
    }
    if m > 0 {
        let a = CsrMatrix::from_triplets(m, triplets);
        if let Some(r) = (0..m).find(|&r| !(a.get(r, r) > 0.0)) {
            return Err(Error::LinearSolve(format!(
                "vertex {} has no positive total weight",
                interior[r]
            )));
        }
        let max_iter = 20 * m + 100;
        for axis in 0..2 {
            let b: Vec<f64> = rhs.iter().map(|p| p[axis]).collect();
            let x = solve_cg(&a, &b, 1e-14, max_iter)?;
            let mut ax = vec![0.0; m];
            a.mul_vec(&x, &mut ax);
            for r in 0..m {
                let res = (ax[r] - b[r]).abs() / row_weight[r];
                if !(res <= RESIDUAL_TOLERANCE) {
                    return Err(Error::LinearSolve(format!(
                        "residual {res:e} at vertex {} exceeds {RESIDUAL_TOLERANCE:e}",
                        interior[r]
                    )));
                }
            }
            for (r, &v) in interior.iter().enumerate() {
                uv[v][axis] = x[r];
            }
        }
    }
    let map = ParamMap {
        uv,
        stage: match weights {
            Weights::Uniform => Stage::Uniform,
            Weights::Harmonic => Stage::Harmonic,
        },
        corners,
    };
    map.check_orientation(mesh)?;
    Ok(map)
}
