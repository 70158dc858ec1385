//! Indexed triangle meshes with halfedge connectivity.
//!
//! Halfedge `h = 3 * f + k` belongs to face `f` and runs from corner `k` to
//! corner `(k + 1) % 3`. `next` and `prev` are therefore implicit; only the
//! twin map is stored.

mod cut;
mod io;
mod measure;
mod topology;

pub use cut::cut_to_disk;
pub use io::{load_mesh, parse_obj, parse_ply, save_obj, write_obj};
pub use measure::{vertex_measures, VertexMeasure};
pub use topology::{validate_topology, TopologyReport};

use crate::error::{Error, Result};
use crate::geom::{bbox3, cross3, dist3, norm3, sub3, triangle_area3, Vec3};

/// Triangles whose area is below this fraction of the squared bounding-box
/// diagonal are rejected as degenerate.
pub const DEGENERATE_AREA_FACTOR: f64 = 1e-12;

const NO_TWIN: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct Mesh {
    positions: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    twins: Vec<usize>,
}

impl Mesh {
    /// Builds a mesh and its connectivity, rejecting out-of-range indices,
    /// non-manifold or inconsistently oriented edges, and degenerate faces.
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = positions.len();
        for (f, t) in triangles.iter().enumerate() {
            for &i in t {
                if i >= n {
                    return Err(Error::IndexOutOfRange {
                        face: f,
                        index: i,
                        count: n,
                    });
                }
            }
        }
        if let Some(p) = positions.iter().flatten().find(|c| !c.is_finite()) {
            return Err(Error::Invalid(format!("non-finite vertex coordinate {p}")));
        }
        let threshold = degenerate_threshold(&positions);
        for (f, t) in triangles.iter().enumerate() {
            let repeated = t[0] == t[1] || t[1] == t[2] || t[0] == t[2];
            let area = if repeated {
                0.0
            } else {
                triangle_area3(positions[t[0]], positions[t[1]], positions[t[2]])
            };
            if repeated || area <= 0.0 || area < threshold {
                return Err(Error::DegenerateTriangle {
                    face: f,
                    area,
                    threshold,
                });
            }
        }
        let twins = match_twins(&triangles)?;
        Ok(Mesh {
            positions,
            triangles,
            twins,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Vec3 {
        self.positions[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, f: usize) -> [usize; 3] {
        self.triangles[f]
    }

    pub fn halfedge_count(&self) -> usize {
        self.twins.len()
    }

    #[inline]
    pub fn face_of(&self, h: usize) -> usize {
        h / 3
    }

    #[inline]
    pub fn next(&self, h: usize) -> usize {
        3 * (h / 3) + (h % 3 + 1) % 3
    }

    #[inline]
    pub fn prev(&self, h: usize) -> usize {
        3 * (h / 3) + (h % 3 + 2) % 3
    }

    #[inline]
    pub fn origin(&self, h: usize) -> usize {
        self.triangles[h / 3][h % 3]
    }

    #[inline]
    pub fn target(&self, h: usize) -> usize {
        self.triangles[h / 3][(h % 3 + 1) % 3]
    }

    #[inline]
    pub fn twin(&self, h: usize) -> Option<usize> {
        let t = self.twins[h];
        (t != NO_TWIN).then_some(t)
    }

    #[inline]
    pub fn is_boundary_halfedge(&self, h: usize) -> bool {
        self.twins[h] == NO_TWIN
    }

    /// Undirected edges, each listed once as `[origin, target]` of a
    /// representative halfedge.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        (0..self.halfedge_count())
            .filter(|&h| self.twins[h] == NO_TWIN || h < self.twins[h])
            .map(|h| [self.origin(h), self.target(h)])
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.halfedge_count())
            .filter(|&h| self.twins[h] == NO_TWIN || h < self.twins[h])
            .count()
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertex_count()];
        for h in 0..self.halfedge_count() {
            if self.is_boundary_halfedge(h) {
                flags[self.origin(h)] = true;
                flags[self.target(h)] = true;
            }
        }
        flags
    }

    /// Boundary loops as vertex sequences. Each loop follows the boundary
    /// halfedges, so the surface lies to the left of the walk, and starts at
    /// its smallest vertex index. Loops are ordered by that starting index.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let mut visited = vec![false; self.halfedge_count()];
        let mut loops = Vec::new();
        for start in 0..self.halfedge_count() {
            if !self.is_boundary_halfedge(start) || visited[start] {
                continue;
            }
            let mut verts = Vec::new();
            let mut h = start;
            loop {
                visited[h] = true;
                verts.push(self.origin(h));
                h = self.next_boundary(h);
                if h == start || visited[h] {
                    break;
                }
            }
            let min_pos = verts
                .iter()
                .enumerate()
                .min_by_key(|(_, &v)| v)
                .map(|(i, _)| i)
                .unwrap_or(0);
            verts.rotate_left(min_pos);
            loops.push(verts);
        }
        loops.sort_by_key(|l| l[0]);
        loops
    }

    /// The boundary halfedge leaving the target of boundary halfedge `h`,
    /// found by rotating around that vertex through the interior.
    fn next_boundary(&self, h: usize) -> usize {
        let mut g = self.next(h);
        let mut guard = 0;
        while let Some(t) = self.twin(g) {
            g = self.next(t);
            guard += 1;
            if guard > self.halfedge_count() {
                break;
            }
        }
        g
    }

    /// Sorted, deduplicated one-ring neighbours of every vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for t in &self.triangles {
            for k in 0..3 {
                let a = t[k];
                let b = t[(k + 1) % 3];
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangles[f];
        triangle_area3(self.positions[a], self.positions[b], self.positions[c])
    }

    /// Unnormalized face normal with length twice the face area.
    pub fn face_normal_weighted(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.triangles[f];
        let pa = self.positions[a];
        cross3(sub3(self.positions[b], pa), sub3(self.positions[c], pa))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.face_count()).map(|f| self.face_area(f)).sum()
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        dist3(self.positions[a], self.positions[b])
    }

    pub fn bbox(&self) -> Option<(Vec3, Vec3)> {
        bbox3(&self.positions)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        self.bbox().map(|(lo, hi)| norm3(sub3(hi, lo))).unwrap_or(0.0)
    }

    /// Number of connected components of the vertex graph (isolated vertices
    /// count as components).
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertex_count()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for t in &self.triangles {
            for k in 0..2 {
                let a = find(&mut parent, t[k]);
                let b = find(&mut parent, t[k + 1]);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        (0..self.vertex_count())
            .filter(|&v| find(&mut parent, v) == v)
            .count()
    }
}

pub(crate) fn degenerate_threshold(positions: &[Vec3]) -> f64 {
    let diag = bbox3(positions)
        .map(|(lo, hi)| norm3(sub3(hi, lo)))
        .unwrap_or(0.0);
    DEGENERATE_AREA_FACTOR * diag * diag
}

/// Pairs each halfedge with its opposite by sorting undirected edge keys.
fn match_twins(triangles: &[[usize; 3]]) -> Result<Vec<usize>> {
    let mut keys: Vec<(usize, usize, usize)> = Vec::with_capacity(triangles.len() * 3);
    for (f, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let a = t[k];
            let b = t[(k + 1) % 3];
            keys.push((a.min(b), a.max(b), 3 * f + k));
        }
    }
    keys.sort_unstable();
    let mut twins = vec![NO_TWIN; keys.len()];
    let origin = |h: usize| triangles[h / 3][h % 3];
    let mut i = 0;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j].0 == keys[i].0 && keys[j].1 == keys[i].1 {
            j += 1;
        }
        match j - i {
            1 => {}
            2 => {
                let (h0, h1) = (keys[i].2, keys[i + 1].2);
                if origin(h0) == origin(h1) {
                    return Err(Error::NonManifoldEdge(keys[i].0, keys[i].1));
                }
                twins[h0] = h1;
                twins[h1] = h0;
            }
            _ => return Err(Error::NonManifoldEdge(keys[i].0, keys[i].1)),
        }
        i = j;
    }
    Ok(twins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn halfedge_invariants_on_grid() {
        let mesh = shapes::grid(5, 4);
        for h in 0..mesh.halfedge_count() {
            assert_eq!(mesh.next(mesh.next(mesh.next(h))), h);
            if let Some(t) = mesh.twin(h) {
                assert_eq!(mesh.twin(t), Some(h));
                assert_eq!(mesh.origin(t), mesh.target(h));
                assert_eq!(mesh.target(t), mesh.origin(h));
            }
        }
    }

    #[test]
    fn rejects_three_faces_on_one_edge() {
        let p = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let err = Mesh::new(p, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, Error::NonManifoldEdge(0, 1)));
    }

    #[test]
    fn rejects_inconsistent_orientation() {
        let p = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
        ];
        let err = Mesh::new(p, vec![[0, 1, 2], [0, 1, 3]]).unwrap_err();
        assert!(matches!(err, Error::NonManifoldEdge(..)));
    }

    #[test]
    fn rejects_degenerate_and_out_of_range() {
        let p = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(matches!(
            Mesh::new(p.clone(), vec![[0, 1, 2]]),
            Err(Error::DegenerateTriangle { .. })
        ));
        assert!(matches!(
            Mesh::new(p, vec![[0, 1, 3]]),
            Err(Error::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn boundary_loop_of_grid_runs_counter_clockwise() {
        let mesh = shapes::grid(3, 3);
        let loops = mesh.boundary_loops();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0], vec![0, 1, 2, 5, 8, 7, 6, 3]);
    }
}
