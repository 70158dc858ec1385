use super::{GeometryImage, ImageMeta};
use crate::geom::{normalize3, Vec3};

fn average4(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Vec3 {
    [0, 1, 2].map(|k| 0.25 * (a[k] + b[k] + c[k] + d[k]))
}

/// One 2x2 box-filter step. Averaged normals are renormalized. A 1x1 image
/// is returned unchanged.
pub fn downsample(image: &GeometryImage) -> GeometryImage {
    let res = image.meta.resolution;
    if res <= 1 {
        return image.clone();
    }
    let half = res / 2;
    let pick = |data: &[Vec3], row: usize, col: usize| {
        let i = 2 * row * res + 2 * col;
        average4(data[i], data[i + 1], data[i + res], data[i + res + 1])
    };
    let mut positions = Vec::with_capacity(half * half);
    let mut normals = image.normals.as_ref().map(|_| Vec::with_capacity(half * half));
    for row in 0..half {
        for col in 0..half {
            positions.push(pick(&image.positions, row, col));
            if let (Some(out), Some(src)) = (normals.as_mut(), image.normals.as_ref()) {
                out.push(normalize3(pick(src, row, col)));
            }
        }
    }
    GeometryImage {
        meta: ImageMeta {
            resolution: half,
            level: image.meta.level + 1,
            ..image.meta.clone()
        },
        positions,
        normals,
        coverage: vec![true; half * half],
    }
}

/// The full pyramid from `base` down to 1x1, `log2(res) + 1` levels.
pub fn build_mipmap(base: &GeometryImage) -> Vec<GeometryImage> {
    let mut levels = vec![base.clone()];
    while levels.last().unwrap().meta.resolution > 1 {
        let next = downsample(levels.last().unwrap());
        levels.push(next);
    }
    levels
}
