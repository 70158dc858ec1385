//! Geometry images: square grids of surface positions and normals sampled
//! through a UV map, with a box-filtered mipmap pyramid and a 16-bit PNG
//! encoding.

mod codec;
mod mipmap;
mod raster;

pub use codec::{
    decode_image, decode_png, encode_png, load_image, normal_path, save_image, sidecar_path, QUANT_STEP,
};
pub use mipmap::{build_mipmap, downsample};
pub use raster::{fill_uncovered, rasterize};

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;

/// Sidecar metadata. Positions are stored as `(p - bbox_min) / extent` per
/// axis, with zero extents replaced by one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
    pub resolution: usize,
    pub level: usize,
    pub source: String,
}

impl ImageMeta {
    pub fn extent(&self) -> Vec3 {
        let mut e = [1.0; 3];
        for k in 0..3 {
            let d = self.bbox_max[k] - self.bbox_min[k];
            if d > 0.0 {
                e[k] = d;
            }
        }
        e
    }

    pub fn normalize(&self, p: Vec3) -> Vec3 {
        let e = self.extent();
        [0, 1, 2].map(|k| (p[k] - self.bbox_min[k]) / e[k])
    }

    pub fn denormalize(&self, q: Vec3) -> Vec3 {
        let e = self.extent();
        [0, 1, 2].map(|k| self.bbox_min[k] + q[k] * e[k])
    }
}

/// A square geometry image. Pixel `(row, col)` sits at index
/// `row * resolution + col` and samples `u = (col + 0.5) / resolution`,
/// `v = (row + 0.5) / resolution`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryImage {
    pub meta: ImageMeta,
    /// Normalized positions in `[0,1]^3`.
    pub positions: Vec<Vec3>,
    /// Unit normals, when present.
    pub normals: Option<Vec<Vec3>>,
    /// Pixels hit by a UV triangle before the boundary fill; all true for
    /// decoded or downsampled images.
    pub coverage: Vec<bool>,
}

impl GeometryImage {
    pub fn resolution(&self) -> usize {
        self.meta.resolution
    }

    pub fn position(&self, row: usize, col: usize) -> Vec3 {
        self.positions[row * self.meta.resolution + col]
    }

    /// Positions in model coordinates.
    pub fn model_positions(&self) -> Vec<Vec3> {
        self.positions.iter().map(|&q| self.meta.denormalize(q)).collect()
    }
}

pub(crate) fn check_power_of_two(resolution: usize) -> crate::Result<()> {
    if resolution == 0 || !resolution.is_power_of_two() {
        return Err(crate::Error::NotPowerOfTwo(resolution));
    }
    Ok(())
}
