//! Area-preserving geometry images.
//!
//! A disk-topology triangle mesh is flattened conformally onto the unit
//! square ([`conformal`]), then made strictly area-preserving by
//! semi-discrete optimal transport ([`ot`]). The resulting UV map is
//! rasterized into 16-bit position and normal images with a mipmap pyramid
//! ([`image`]), from which meshes can be rebuilt at any level ([`extract`])
//! and scored against the source ([`metrics`]).

pub mod conformal;
pub mod error;
pub mod extract;
pub mod geom;
pub mod image;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod ot;
pub mod param;
pub mod pipeline;
pub mod shapes;

pub use error::{Error, ErrorKind, Result};
pub use mesh::Mesh;
pub use param::{ParamMap, Stage};
