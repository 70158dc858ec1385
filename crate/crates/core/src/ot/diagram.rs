//! Power diagrams of weighted sites restricted to the unit square.
//!
//! Cell `i` is `{x in [0,1]^2 : <x, p_i> + h_i >= <x, p_j> + h_j for all j}`.
//! Each cell is built by clipping the square against the half-planes of
//! nearby sites, visited in rings of a uniform bucket grid, until a
//! security radius proves that no farther site can cut the cell.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{dot2, norm2, sub2, Vec2};

/// A convex cell. Edge `k` runs from `polygon[k]` to `polygon[k + 1]` and
/// is shared with site `neighbors[k]`, or lies on the square's boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub polygon: Vec<Vec2>,
    pub neighbors: Vec<Option<usize>>,
    pub area: f64,
    /// Zero for an empty cell.
    pub centroid: Vec2,
}

impl Cell {
    pub fn is_empty(&self) -> bool {
        !(self.area > 0.0)
    }
}

/// An interface between two cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEdge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct PowerDiagram {
    pub heights: Vec<f64>,
    pub cells: Vec<Cell>,
    /// Edges with `i < j`, sorted.
    pub edges: Vec<PowerEdge>,
}

impl PowerDiagram {
    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.area).collect()
    }

    pub fn empty_cells(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| self.cells[i].is_empty()).collect()
    }

    pub fn edge_length(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .map(|k| self.edges[k].length)
            .unwrap_or(0.0)
    }

    /// Writes the cells as an OBJ polygon soup in the z = 0 plane.
    pub fn write_obj<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut base = 1;
        for cell in &self.cells {
            for p in &cell.polygon {
                writeln!(out, "v {} {} 0", p[0], p[1])?;
            }
        }
        for cell in &self.cells {
            if cell.polygon.len() >= 3 {
                write!(out, "f")?;
                for k in 0..cell.polygon.len() {
                    write!(out, " {}", base + k)?;
                }
                writeln!(out)?;
            }
            base += cell.polygon.len();
        }
        Ok(())
    }
}

/// Uniform bucket grid over the unit square.
struct Buckets {
    size: usize,
    cell: f64,
    slots: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(sites: &[Vec2]) -> Self {
        let size = ((sites.len() as f64 / 2.0).sqrt() as usize).max(1);
        let mut slots = vec![Vec::new(); size * size];
        let b = Buckets {
            size,
            cell: 1.0 / size as f64,
            slots: Vec::new(),
        };
        for (i, p) in sites.iter().enumerate() {
            let (x, y) = b.locate(*p);
            slots[y * size + x].push(i);
        }
        Buckets { slots, ..b }
    }

    fn locate(&self, p: Vec2) -> (usize, usize) {
        let f = |t: f64| ((t * self.size as f64).floor().max(0.0) as usize).min(self.size - 1);
        (f(p[0]), f(p[1]))
    }

    /// Calls `visit` with every bucket at Chebyshev distance exactly `r`
    /// from `(cx, cy)`.
    fn ring(&self, cx: usize, cy: usize, r: usize, mut visit: impl FnMut(&[usize])) {
        let (cx, cy, r, n) = (cx as isize, cy as isize, r as isize, self.size as isize);
        for y in cy - r..=cy + r {
            if y < 0 || y >= n {
                continue;
            }
            let step = if y == cy - r || y == cy + r { 1 } else { (2 * r).max(1) };
            let mut x = cx - r;
            while x <= cx + r {
                if x >= 0 && x < n {
                    visit(&self.slots[(y * n + x) as usize]);
                }
                x += step;
            }
        }
    }
}

/// Clips a convex polygon to `<x, a> <= b`; the new edge is tagged `label`.
fn clip(poly: &[Vec2], tags: &[Option<usize>], a: Vec2, b: f64, label: usize) -> (Vec<Vec2>, Vec<Option<usize>>) {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    let mut out_tags = Vec::with_capacity(n + 1);
    let side: Vec<f64> = poly.iter().map(|p| dot2(*p, a) - b).collect();
    for k in 0..n {
        let l = (k + 1) % n;
        let (sk, sl) = (side[k], side[l]);
        let inside_k = sk <= 0.0;
        let inside_l = sl <= 0.0;
        let cut = |t: f64| {
            [
                poly[k][0] + t * (poly[l][0] - poly[k][0]),
                poly[k][1] + t * (poly[l][1] - poly[k][1]),
            ]
        };
        match (inside_k, inside_l) {
            (true, true) => {
                out.push(poly[k]);
                out_tags.push(tags[k]);
            }
            (true, false) => {
                out.push(poly[k]);
                out_tags.push(tags[k]);
                if sk < 0.0 {
                    out.push(cut(sk / (sk - sl)));
                    out_tags.push(Some(label));
                } else {
                    // the vertex lies on the line: the kept edge degenerates
                    *out_tags.last_mut().unwrap() = Some(label);
                }
            }
            (false, true) => {
                if sl < 0.0 {
                    out.push(cut(sk / (sk - sl)));
                    out_tags.push(tags[k]);
                }
            }
            (false, false) => {}
        }
    }
    if out.len() < 3 {
        out.clear();
        out_tags.clear();
    }
    (out, out_tags)
}

fn polygon_moments(poly: &[Vec2]) -> (f64, Vec2) {
    let n = poly.len();
    if n < 3 {
        return (0.0, [0.0, 0.0]);
    }
    // shoelace about the first vertex to limit cancellation
    let o = poly[0];
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for k in 1..n - 1 {
        let a = sub2(poly[k], o);
        let b = sub2(poly[k + 1], o);
        let cr = a[0] * b[1] - a[1] * b[0];
        area2 += cr;
        cx += cr * (a[0] + b[0]);
        cy += cr * (a[1] + b[1]);
    }
    if !(area2 > 0.0) {
        return (0.0, [0.0, 0.0]);
    }
    let area = 0.5 * area2;
    (area, [o[0] + cx / (3.0 * area2), o[1] + cy / (3.0 * area2)])
}

fn build_cell(i: usize, sites: &[Vec2], heights: &[f64], omega: &[f64], omega_max: f64, buckets: &Buckets) -> Cell {
    let p = sites[i];
    let mut poly = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut tags: Vec<Option<usize>> = vec![None; 4];
    let (cx, cy) = buckets.locate(p);
    for r in 0..buckets.size {
        buckets.ring(cx, cy, r, |slot| {
            for &j in slot {
                if j == i || poly.is_empty() {
                    continue;
                }
                let a = sub2(sites[j], p);
                let (np, nt) = clip(&poly, &tags, a, heights[i] - heights[j], j);
                poly = np;
                tags = nt;
            }
        });
        if poly.is_empty() {
            break;
        }
        // sites beyond ring r are at least r * cell away from p
        let reach = poly.iter().map(|q| norm2(sub2(*q, p))).fold(0.0, f64::max);
        let gap = r as f64 * buckets.cell;
        if gap >= reach && (gap - reach).powi(2) >= reach * reach + omega_max - omega[i] {
            break;
        }
    }
    let (area, centroid) = polygon_moments(&poly);
    Cell {
        polygon: poly,
        neighbors: tags,
        area,
        centroid,
    }
}

/// Returns the first pair of identical sites, if any.
pub(crate) fn find_duplicate(sites: &[Vec2]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| {
        sites[a][0]
            .total_cmp(&sites[b][0])
            .then(sites[a][1].total_cmp(&sites[b][1]))
            .then(a.cmp(&b))
    });
    order
        .windows(2)
        .filter(|w| sites[w[0]] == sites[w[1]])
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .min()
}

/// Power diagram of `sites` with `heights`, clipped to the unit square.
/// Empty cells are reported with zero area.
pub fn power_diagram(sites: &[Vec2], heights: &[f64]) -> Result<PowerDiagram> {
    if sites.len() != heights.len() {
        return Err(Error::Invalid(format!(
            "{} sites but {} heights",
            sites.len(),
            heights.len()
        )));
    }
    if let Some(i) = (0..sites.len()).find(|&i| {
        !(sites[i][0].is_finite() && sites[i][1].is_finite() && heights[i].is_finite())
    }) {
        return Err(Error::Invalid(format!("site {i} has a non-finite coordinate or height")));
    }
    if let Some((i, j)) = find_duplicate(sites) {
        return Err(Error::DuplicateSites(i, j));
    }
    // power weight: |x - p_i|^2 - omega_i ranks cells the same way
    let omega: Vec<f64> = sites
        .iter()
        .zip(heights)
        .map(|(p, h)| 2.0 * h + dot2(*p, *p))
        .collect();
    let omega_max = omega.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let buckets = Buckets::new(sites);
    let cells: Vec<Cell> = (0..sites.len())
        .into_par_iter()
        .map(|i| build_cell(i, sites, heights, &omega, omega_max, &buckets))
        .collect();

    let mut sides: Vec<((usize, usize), bool, f64)> = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let n = cell.polygon.len();
        for k in 0..n {
            if let Some(j) = cell.neighbors[k] {
                let len = norm2(sub2(cell.polygon[(k + 1) % n], cell.polygon[k]));
                sides.push(((i.min(j), i.max(j)), i < j, len));
            }
        }
    }
    sides.sort_by(|a, b| a.0.cmp(&b.0));
    let mut edges: Vec<PowerEdge> = Vec::new();
    let mut k = 0;
    while k < sides.len() {
        let key = sides[k].0;
        let (mut lo, mut hi) = (0.0, 0.0);
        while k < sides.len() && sides[k].0 == key {
            if sides[k].1 {
                lo += sides[k].2;
            } else {
                hi += sides[k].2;
            }
            k += 1;
        }
        // both cells see the same segment; average away rounding differences
        let length = 0.5 * (lo + hi);
        if length > 0.0 {
            edges.push(PowerEdge {
                i: key.0,
                j: key.1,
                length,
            });
        }
    }
    Ok(PowerDiagram {
        heights: heights.to_vec(),
        cells,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn voronoi_heights(sites: &[Vec2]) -> Vec<f64> {
        sites.iter().map(|p| -0.5 * dot2(*p, *p)).collect()
    }

    #[test]
    fn single_site_owns_the_square() {
        let d = power_diagram(&[[0.3, 0.7]], &[5.0]).unwrap();
        assert_eq!(d.cells[0].area, 1.0);
        assert_eq!(d.cells[0].centroid, [0.5, 0.5]);
        assert!(d.edges.is_empty());
    }

    #[test]
    fn two_sites_split_at_the_bisector() {
        let sites = [[0.25, 0.5], [0.75, 0.5]];
        let d = power_diagram(&sites, &voronoi_heights(&sites)).unwrap();
        assert!((d.cells[0].area - 0.5).abs() < 1e-15);
        assert!((d.cells[1].area - 0.5).abs() < 1e-15);
        assert!((d.edge_length(0, 1) - 1.0).abs() < 1e-15);
        assert_eq!(d.edge_length(1, 0), d.edge_length(0, 1));

        // raw heights (0.1, 0): <x, p1> + 0.1 = <x, p2>  at  x = 0.2
        let d = power_diagram(&sites, &[0.1, 0.0]).unwrap();
        assert!((d.cells[0].area - 0.2).abs() < 1e-15);
        assert!((d.cells[1].area - 0.8).abs() < 1e-15);
        for q in &d.cells[0].polygon {
            assert!(q[0] <= 0.2 + 1e-15);
        }
    }

    #[test]
    fn dominated_site_has_empty_cell() {
        let sites = [[0.25, 0.5], [0.75, 0.5]];
        let d = power_diagram(&sites, &[0.0, 1.0]).unwrap();
        assert_eq!(d.empty_cells(), vec![0]);
        assert_eq!(d.cells[1].area, 1.0);
        assert!(d.edges.is_empty());
    }

    #[test]
    fn duplicate_sites_are_rejected() {
        let sites = [[0.1, 0.1], [0.5, 0.5], [0.1, 0.1]];
        assert!(matches!(power_diagram(&sites, &[0.0; 3]), Err(Error::DuplicateSites(0, 2))));
    }

    #[test]
    fn random_diagrams_tile_the_square_and_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in [3usize, 40, 300] {
            let sites: Vec<Vec2> = (0..k).map(|_| [rng.random(), rng.random()]).collect();
            let heights: Vec<f64> = sites
                .iter()
                .map(|p| -0.5 * dot2(*p, *p) + 0.02 * rng.random::<f64>())
                .collect();
            let d = power_diagram(&sites, &heights).unwrap();
            let total: f64 = d.areas().iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "k = {k}: total area {total}");
            // every cell vertex must belong to its own site's upper envelope
            for (i, cell) in d.cells.iter().enumerate() {
                for q in &cell.polygon {
                    let own = dot2(*q, sites[i]) + heights[i];
                    let best = (0..k)
                        .map(|j| dot2(*q, sites[j]) + heights[j])
                        .fold(f64::NEG_INFINITY, f64::max);
                    assert!(best - own < 1e-12);
                }
            }
            // adjacency is symmetric with equal lengths on both sides
            for e in &d.edges {
                let side = |a: usize, b: usize| -> f64 {
                    let c = &d.cells[a];
                    let n = c.polygon.len();
                    (0..n)
                        .filter(|&k| c.neighbors[k] == Some(b))
                        .map(|k| norm2(sub2(c.polygon[(k + 1) % n], c.polygon[k])))
                        .sum()
                };
                assert!((side(e.i, e.j) - side(e.j, e.i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn centroid_of_a_triangle() {
        let (area, c) = polygon_moments(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!((area - 0.5).abs() < 1e-15);
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-15 && (c[1] - 1.0 / 3.0).abs() < 1e-15);
    }
}
