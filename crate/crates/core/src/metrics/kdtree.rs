//! Exact nearest-neighbour queries over a static 3D point set.

use crate::geom::{dist2_sq3, Vec3};

/// Balanced kd-tree stored implicitly: the median of each slice is its
/// root, split on the axis cycling with depth.
pub struct KdTree {
    points: Vec<Vec3>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut points = points.to_vec();
        build(&mut points, 0);
        KdTree { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Squared distance from `q` to the closest point; infinite when empty.
    pub fn nearest_dist2(&self, q: Vec3) -> f64 {
        let mut best = f64::INFINITY;
        search(&self.points, 0, q, &mut best);
        best
    }
}

fn build(points: &mut [Vec3], depth: usize) {
    if points.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = points.len() / 2;
    points.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let (left, right) = points.split_at_mut(mid);
    build(left, depth + 1);
    build(&mut right[1..], depth + 1);
}

fn search(points: &[Vec3], depth: usize, q: Vec3, best: &mut f64) {
    if points.is_empty() {
        return;
    }
    let mid = points.len() / 2;
    let p = points[mid];
    let d = dist2_sq3(p, q);
    if d < *best {
        *best = d;
    }
    let axis = depth % 3;
    let diff = q[axis] - p[axis];
    let (near, far) = if diff < 0.0 {
        (&points[..mid], &points[mid + 1..])
    } else {
        (&points[mid + 1..], &points[..mid])
    };
    search(near, depth + 1, q, best);
    if diff * diff < *best {
        search(far, depth + 1, q, best);
    }
}
