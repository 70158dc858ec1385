use std::collections::VecDeque;

use super::{validate_topology, Mesh};
use crate::error::{Error, Result};

/// Opens a closed genus-0 mesh into a topological disk.
///
/// The seam is a shortest edge path between the two vertices found by a
/// double breadth-first search (ties broken by smaller vertex index). When
/// that path is a single edge it is rerouted through the smallest-index
/// common neighbour, because an indexed triangle list cannot express a slit
/// without at least one duplicated vertex. Interior seam vertices are
/// duplicated; faces on the left of the seam get the copies.
pub fn cut_to_disk(mesh: &Mesh) -> Result<Mesh> {
    let report = validate_topology(mesh);
    if !report.is_sphere() || mesh.component_count() != 1 {
        return Err(Error::Topology(format!(
            "cut_to_disk needs a closed connected genus-0 mesh (chi = {}, boundary loops = {})",
            report.euler_characteristic, report.boundary_loops
        )));
    }
    let path = seam_path(mesh);
    let n = mesh.vertex_count();

    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for h in 0..mesh.halfedge_count() {
        outgoing[mesh.origin(h)].push(h);
    }
    let find = |from: usize, to: usize| -> usize {
        outgoing[from]
            .iter()
            .copied()
            .find(|&h| mesh.target(h) == to)
            .expect("seam path follows mesh edges")
    };

    let mut positions = mesh.positions().to_vec();
    let mut triangles = mesh.triangles().to_vec();
    for i in 1..path.len() - 1 {
        let (prev, v, next) = (path[i - 1], path[i], path[i + 1]);
        let copy = positions.len();
        positions.push(mesh.position(v));
        // Sweep counter-clockwise from the outgoing seam edge until the
        // incoming one; those faces lie on the left of the seam.
        let mut g = find(v, next);
        for _ in 0..outgoing[v].len() {
            if mesh.target(g) == prev {
                break;
            }
            let f = mesh.face_of(g);
            for slot in &mut triangles[f] {
                if *slot == v {
                    *slot = copy;
                }
            }
            g = mesh
                .twin(mesh.prev(g))
                .expect("closed mesh has no boundary halfedges");
        }
    }
    let cut = Mesh::new(positions, triangles)?;
    let after = validate_topology(&cut);
    if !after.is_disk {
        return Err(Error::Topology(format!(
            "cut produced chi = {}, loops = {}",
            after.euler_characteristic, after.boundary_loops
        )));
    }
    Ok(cut)
}

/// The seam as a vertex sequence with at least one interior vertex.
pub(crate) fn seam_path(mesh: &Mesh) -> Vec<usize> {
    let adj = mesh.vertex_neighbors();
    let (a, _) = bfs(&adj, 0);
    let a = farthest(&a);
    let (dist, parent) = bfs(&adj, a);
    let b = farthest(&dist);
    let mut path = vec![b];
    let mut v = b;
    while v != a {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    if path.len() == 2 {
        let (a, b) = (path[0], path[1]);
        let c = adj[a]
            .iter()
            .copied()
            .find(|c| adj[b].binary_search(c).is_ok())
            .expect("an edge of a closed triangle mesh has a common neighbour");
        path = vec![a, c, b];
    }
    path
}

fn bfs(adj: &[Vec<usize>], source: usize) -> (Vec<usize>, Vec<usize>) {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut parent = vec![usize::MAX; adj.len()];
    dist[source] = 0;
    parent[source] = source;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    (dist, parent)
}

fn farthest(dist: &[usize]) -> usize {
    let mut best = 0;
    for (v, &d) in dist.iter().enumerate() {
        if d != usize::MAX && d > dist[best] {
            best = v;
        }
    }
    best
}
