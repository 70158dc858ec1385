//! Mesh reconstruction from a geometry image: one vertex per pixel, each
//! pixel quad split along its shorter 3D diagonal.

use crate::error::Result;
use crate::geom::{dist2_sq3, triangle_area3};
use crate::image::GeometryImage;
use crate::mesh::{degenerate_threshold, Mesh};

/// Vertex `row * res + col` sits at the pixel's denormalized position.
/// Quads split along the shorter diagonal (ties go to top-left to
/// bottom-right); triangles below the degeneracy threshold are dropped.
pub fn extract_mesh(image: &GeometryImage) -> Result<Mesh> {
    let res = image.resolution();
    let positions = image.model_positions();
    let threshold = degenerate_threshold(&positions);
    let mut triangles = Vec::with_capacity(2 * res.saturating_sub(1).pow(2));
    for row in 0..res.saturating_sub(1) {
        for col in 0..res - 1 {
            let a = row * res + col;
            let b = a + 1;
            let c = a + res + 1;
            let d = a + res;
            let main = dist2_sq3(positions[a], positions[c]);
            let anti = dist2_sq3(positions[b], positions[d]);
            let pair = if main <= anti {
                [[a, b, c], [a, c, d]]
            } else {
                [[a, b, d], [b, c, d]]
            };
            for t in pair {
                let area = triangle_area3(positions[t[0]], positions[t[1]], positions[t[2]]);
                if area > 0.0 && area >= threshold {
                    triangles.push(t);
                }
            }
        }
    }
    Mesh::new(positions, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ImageMeta;

    fn image(res: usize, f: impl Fn(usize, usize) -> [f64; 3]) -> GeometryImage {
        let positions = (0..res * res).map(|i| f(i / res, i % res)).collect();
        GeometryImage {
            meta: ImageMeta {
                bbox_min: [0.0; 3],
                bbox_max: [1.0; 3],
                resolution: res,
                level: 0,
                source: "test".into(),
            },
            positions,
            normals: None,
            coverage: vec![true; res * res],
        }
    }

    fn ramp(res: usize) -> GeometryImage {
        let r = res as f64;
        image(res, |row, col| [(col as f64 + 0.5) / r, (row as f64 + 0.5) / r, 0.0])
    }

    #[test]
    fn full_grid_counts() {
        let m = extract_mesh(&ramp(8)).unwrap();
        assert_eq!(m.vertex_count(), 64);
        assert_eq!(m.face_count(), 2 * 49);
        assert!(crate::mesh::validate_topology(&m).is_disk);
    }

    #[test]
    fn single_pixel() {
        let m = extract_mesh(&ramp(1)).unwrap();
        assert_eq!(m.vertex_count(), 1);
        assert_eq!(m.face_count(), 0);
    }

    #[test]
    fn splits_along_shorter_diagonal() {
        // lifting one corner lengthens the diagonal through it
        let img = image(2, |row, col| [col as f64, row as f64, if (row, col) == (0, 1) { 1.0 } else { 0.0 }]);
        let m = extract_mesh(&img).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 3], [0, 3, 2]]);
        let img = image(2, |row, col| [col as f64, row as f64, if (row, col) == (0, 0) { 1.0 } else { 0.0 }]);
        let m = extract_mesh(&img).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [1, 3, 2]]);
    }

    #[test]
    fn collapsed_quads_are_culled() {
        let img = image(4, |row, col| [col.min(1) as f64, row.min(1) as f64, 0.0]);
        let m = extract_mesh(&img).unwrap();
        assert_eq!(m.face_count(), 2);
    }
}
