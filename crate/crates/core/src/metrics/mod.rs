//! Reconstruction error between point samples of two surfaces and the
//! storage ratio of a mipmap level.

mod kdtree;

pub use kdtree::KdTree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::Mesh;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;
/// Resolution of the full geometry image that compression is measured against.
pub const BASE_RESOLUTION: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    pub points: Vec<Vec3>,
    pub seed: u64,
}

/// `n` points on the surface: faces drawn with probability proportional
/// to area, then a uniform point inside the face.
pub fn sample_surface(mesh: &Mesh, n: usize, seed: u64) -> Result<PointSample> {
    if n == 0 {
        return Err(Error::Invalid("sample count must be positive".into()));
    }
    let mut cdf = Vec::with_capacity(mesh.face_count());
    let mut total = 0.0;
    for f in 0..mesh.face_count() {
        total += mesh.face_area(f);
        cdf.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::ZeroArea);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = cdf.len() - 1;
    let points = (0..n)
        .map(|_| {
            let r = rng.random::<f64>() * total;
            let f = cdf.partition_point(|&c| c <= r).min(last);
            let s = rng.random::<f64>().sqrt();
            let t = rng.random::<f64>();
            let b = [1.0 - s, s * (1.0 - t), s * t];
            let [p0, p1, p2] = mesh.triangle(f).map(|v| mesh.position(v));
            [0, 1, 2].map(|k| b[0] * p0[k] + b[1] * p1[k] + b[2] * p2[k])
        })
        .collect();
    Ok(PointSample { points, seed })
}

/// Translation to the ground truth's bbox minimum followed by a uniform
/// scale that maps its largest extent to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub origin: Vec3,
    pub scale: f64,
}

impl Normalization {
    pub fn from_mesh(mesh: &Mesh) -> Result<Self> {
        let (lo, hi) = mesh.bbox().ok_or(Error::ZeroArea)?;
        let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        Ok(Normalization {
            origin: lo,
            scale: if extent > 0.0 { 1.0 / extent } else { 1.0 },
        })
    }

    pub fn apply(&self, sample: &mut PointSample) {
        for p in &mut sample.points {
            *p = [0, 1, 2].map(|k| (p[k] - self.origin[k]) * self.scale);
        }
    }
}

/// Squared distance from every point of `from` to its nearest point in `to`.
fn nearest_squared(from: &PointSample, to: &PointSample) -> Vec<f64> {
    let tree = KdTree::new(&to.points);
    from.points.par_iter().map(|&q| tree.nearest_dist2(q)).collect()
}

fn check_nonempty(a: &PointSample, b: &PointSample) -> Result<()> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::Invalid("empty point sample".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distances {
    pub chamfer: f64,
    pub hausdorff: f64,
}

/// Chamfer and Hausdorff distances from one pair of nearest-neighbour passes.
pub fn distances(a: &PointSample, b: &PointSample) -> Result<Distances> {
    check_nonempty(a, b)?;
    let ab = nearest_squared(a, b);
    let ba = nearest_squared(b, a);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(Distances {
        chamfer: 0.5 * (mean(&ab) + mean(&ba)),
        hausdorff: max(&ab).max(max(&ba)).sqrt(),
    })
}

/// Half the sum of the two mean squared nearest-neighbour distances.
pub fn chamfer_distance(a: &PointSample, b: &PointSample) -> Result<f64> {
    distances(a, b).map(|d| d.chamfer)
}

/// Largest nearest-neighbour distance in either direction.
pub fn hausdorff_distance(a: &PointSample, b: &PointSample) -> Result<f64> {
    distances(a, b).map(|d| d.hausdorff)
}

/// Samples both meshes with the same seed, normalizes both by the ground
/// truth's bounding box and measures the distances.
pub fn compare_meshes(truth: &Mesh, candidate: &Mesh, samples: usize, seed: u64) -> Result<Distances> {
    let norm = Normalization::from_mesh(truth)?;
    let mut a = sample_surface(truth, samples, seed)?;
    let mut b = sample_surface(candidate, samples, seed)?;
    norm.apply(&mut a);
    norm.apply(&mut b);
    distances(&a, &b)
}

/// `(1024 / resolution)^2` for a power-of-two resolution up to 1024.
pub fn compression_ratio(resolution: usize) -> Result<f64> {
    if resolution == 0 || !resolution.is_power_of_two() || resolution > BASE_RESOLUTION {
        return Err(Error::Invalid(format!(
            "stored resolution {resolution} must be a power of two dividing {BASE_RESOLUTION}"
        )));
    }
    let r = (BASE_RESOLUTION / resolution) as f64;
    Ok(r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn pts(p: &[Vec3]) -> PointSample {
        PointSample {
            points: p.to_vec(),
            seed: 0,
        }
    }

    #[test]
    fn single_pair() {
        let a = pts(&[[0.0; 3]]);
        let b = pts(&[[1.0, 0.0, 0.0]]);
        assert_eq!(chamfer_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(chamfer_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&b, &b).unwrap(), 0.0);
        assert!(chamfer_distance(&a, &pts(&[])).is_err());
    }

    #[test]
    fn samples_stay_on_the_triangle_and_repeat() {
        let m = Mesh::new(vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let s = sample_surface(&m, 3, 9).unwrap();
        for p in &s.points {
            assert!(p[0] >= 0.0 && p[1] >= 0.0 && p[0] / 2.0 + p[1] <= 1.0 + 1e-15 && p[2] == 0.0);
        }
        assert_eq!(s, sample_surface(&m, 3, 9).unwrap());
    }

    #[test]
    fn faces_drawn_by_area() {
        // areas 1 and 3 sharing the edge (0,0)-(2,0)... second triangle is below
        let m = Mesh::new(
            vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.5, 1.0, 0.0], [1.0, -3.0, 0.0]],
            vec![[0, 1, 2], [1, 0, 3]],
        )
        .unwrap();
        let mut fractions = Vec::new();
        for seed in 0..4 {
            let s = sample_surface(&m, 40_000, seed).unwrap();
            let below = s.points.iter().filter(|p| p[1] < 0.0).count();
            fractions.push(below as f64 / 40_000.0);
        }
        let mean = fractions.iter().sum::<f64>() / 4.0;
        assert!((mean - 0.75).abs() < 0.01, "{fractions:?}");
    }

    #[test]
    fn scaling_behaviour() {
        let m = shapes::wave(10, 0.2);
        let a = sample_surface(&m, 500, 1).unwrap();
        let b = sample_surface(&m, 500, 2).unwrap();
        let d = distances(&a, &b).unwrap();
        let scale = |s: &PointSample| pts(&s.points.iter().map(|p| p.map(|x| 2.0 * x)).collect::<Vec<_>>());
        let d2 = distances(&scale(&a), &scale(&b)).unwrap();
        assert!((d2.chamfer / d.chamfer - 4.0).abs() < 1e-12);
        assert!((d2.hausdorff / d.hausdorff - 2.0).abs() < 1e-12);
        let back = distances(&b, &a).unwrap();
        assert_eq!(back.chamfer, d.chamfer);
        assert_eq!(back.hausdorff, d.hausdorff);
        // max beats the mean in each direction
        assert!(d.hausdorff >= nearest_squared(&a, &b).iter().map(|x| x.sqrt()).sum::<f64>() / 500.0);
    }

    #[test]
    fn compression_ratios() {
        assert_eq!(compression_ratio(1024).unwrap(), 1.0);
        assert_eq!(compression_ratio(128).unwrap(), 64.0);
        assert_eq!(compression_ratio(8).unwrap(), 16384.0);
        assert!(compression_ratio(2048).is_err());
        assert!(compression_ratio(100).is_err());
    }
}
