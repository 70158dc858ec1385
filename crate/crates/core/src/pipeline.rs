//! End-to-end stages shared by the command-line tool and the tests.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use log::info;
use serde::Serialize;

use crate::conformal::{baseline_parameterize, conformal_parameterize, default_corners, RicciOptions, RicciSolution, Weights};
use crate::error::{Error, Result};
use crate::extract::extract_mesh;
use crate::image::GeometryImage;
use crate::mesh::{cut_to_disk, validate_topology, vertex_measures, Mesh};
use crate::metrics::{compare_meshes, Distances};
use crate::ot::{area_preserving_uv, solve_ot, OtOptions, OtProblem, OtSolution};
use crate::param::ParamMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Conformal flattening refined by optimal transport.
    Ot,
    Conformal,
    Uniform,
    Harmonic,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ot => "ot",
            Scheme::Conformal => "conformal",
            Scheme::Uniform => "uniform",
            Scheme::Harmonic => "harmonic",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ot" => Scheme::Ot,
            "conformal" => Scheme::Conformal,
            "uniform" => Scheme::Uniform,
            "harmonic" => Scheme::Harmonic,
            other => return Err(Error::Invalid(format!("unknown scheme {other:?}"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ParamOptions {
    pub scheme: Scheme,
    /// Defaults to the quarter points of the boundary by arc length.
    pub corners: Option<[usize; 4]>,
    pub ricci: RicciOptions,
    pub ot: OtOptions,
}

impl Default for ParamOptions {
    fn default() -> Self {
        ParamOptions {
            scheme: Scheme::Ot,
            corners: None,
            ricci: RicciOptions::default(),
            ot: OtOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Parameterization {
    /// The input, or its cut-open disk when the input was a closed sphere.
    pub mesh: Mesh,
    pub map: ParamMap,
    pub ricci: Option<RicciSolution>,
    pub ot: Option<OtSolution>,
}

/// Maps a disk (or a closed genus-0 surface, cut open first) onto the unit
/// square with the chosen scheme.
pub fn parameterize(mesh: &Mesh, opts: &ParamOptions) -> Result<Parameterization> {
    let topo = validate_topology(mesh);
    let mesh = if topo.is_sphere() {
        info!("closed genus-0 input; cutting to a disk");
        cut_to_disk(mesh)?
    } else if topo.is_disk {
        mesh.clone()
    } else {
        return Err(Error::Topology(format!(
            "need a disk or a closed genus-0 surface, got chi = {} with {} boundary loops",
            topo.euler_characteristic, topo.boundary_loops
        )));
    };
    let corners = match opts.corners {
        Some(c) => c,
        None => default_corners(&mesh)?,
    };
    let (map, ricci, ot) = match opts.scheme {
        Scheme::Uniform => (baseline_parameterize(&mesh, Weights::Uniform, corners)?, None, None),
        Scheme::Harmonic => (baseline_parameterize(&mesh, Weights::Harmonic, corners)?, None, None),
        Scheme::Conformal => {
            let (map, ricci) = conformal_parameterize(&mesh, corners, &opts.ricci)?;
            (map, Some(ricci), None)
        }
        Scheme::Ot => {
            let (conformal, ricci) = conformal_parameterize(&mesh, corners, &opts.ricci)?;
            let nu = vertex_measures(&mesh)?.nu;
            let problem = OtProblem::new(conformal.uv.clone(), nu)?;
            let solution = solve_ot(&problem, &opts.ot)?;
            let map = area_preserving_uv(&mesh, &conformal, &solution)?;
            (map, Some(ricci), Some(solution))
        }
    };
    Ok(Parameterization { mesh, map, ricci, ot })
}

/// One pyramid level scored against the ground truth. Distances are absent
/// when the level's mesh has no area (a 1x1 level).
#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub resolution: usize,
    pub compression_ratio: f64,
    pub chamfer: Option<f64>,
    pub hausdorff: Option<f64>,
}

/// Extracts a mesh from every level and compares it with `truth`.
/// Compression is relative to the first level's resolution.
pub fn level_report(truth: &Mesh, levels: &[GeometryImage], samples: usize, seed: u64) -> Result<Vec<LevelRow>> {
    let base = levels
        .first()
        .ok_or_else(|| Error::Invalid("empty pyramid".into()))?
        .resolution();
    let mut rows = Vec::with_capacity(levels.len());
    for img in levels {
        let res = img.resolution();
        let ratio = (base / res) as f64;
        let mesh = extract_mesh(img)?;
        let d: Option<Distances> = if mesh.total_area() > 0.0 {
            Some(compare_meshes(truth, &mesh, samples, seed)?)
        } else {
            None
        };
        rows.push(LevelRow {
            level: img.meta.level,
            resolution: res,
            compression_ratio: ratio * ratio,
            chamfer: d.map(|d| d.chamfer),
            hausdorff: d.map(|d| d.hausdorff),
        });
    }
    Ok(rows)
}

/// Plain-text table in the `CR / CD (x1e-4) / HD (x1e-2)` layout.
pub fn format_table(rows: &[LevelRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<7} {:>11}  CR / CD (x1e-4) / HD (x1e-2)", "level", "resolution");
    for r in rows {
        let size = format!("{0}x{0}", r.resolution);
        let cd = r.chamfer.map_or("-".to_string(), |x| format!("{:.4}", x * 1e4));
        let hd = r.hausdorff.map_or("-".to_string(), |x| format!("{:.4}", x * 1e2));
        let _ = writeln!(out, "{:<7} {:>11}  {} / {} / {}", r.level, size, r.compression_ratio, cd, hd);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{build_mipmap, rasterize};
    use crate::shapes;

    #[test]
    fn every_scheme_maps_into_the_square() {
        let m = shapes::wave(9, 0.15);
        for scheme in [Scheme::Ot, Scheme::Conformal, Scheme::Uniform, Scheme::Harmonic] {
            let opts = ParamOptions {
                scheme,
                corners: Some([0, 8, 80, 72]),
                ..ParamOptions::default()
            };
            let p = parameterize(&m, &opts).unwrap();
            assert!(p.map.in_unit_square(), "{scheme}");
            assert_eq!(p.map.uv.len(), m.vertex_count());
        }
    }

    #[test]
    fn closed_input_is_cut_first() {
        let m = shapes::icosphere(2);
        let opts = ParamOptions {
            scheme: Scheme::Uniform,
            ..ParamOptions::default()
        };
        let p = parameterize(&m, &opts).unwrap();
        assert!(p.mesh.vertex_count() > m.vertex_count());
        assert!(validate_topology(&p.mesh).is_disk);
    }

    #[test]
    fn torus_is_rejected() {
        let err = parameterize(&shapes::torus(12, 8, 1.0, 0.3), &ParamOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Topology(_)));
    }

    #[test]
    fn report_rows_follow_the_pyramid() {
        let m = shapes::grid(9, 9);
        let opts = ParamOptions {
            scheme: Scheme::Uniform,
            ..ParamOptions::default()
        };
        let p = parameterize(&m, &opts).unwrap();
        let img = rasterize(&p.mesh, &p.map, 16, "grid").unwrap();
        let rows = level_report(&m, &build_mipmap(&img), 2000, 42).unwrap();
        let ratios: Vec<f64> = rows.iter().map(|r| r.compression_ratio).collect();
        assert_eq!(ratios, vec![1.0, 4.0, 16.0, 64.0, 256.0]);
        assert!(rows[4].chamfer.is_none());
        let table = format_table(&rows);
        assert_eq!(table.lines().count(), 6);
        assert!(table.contains("256 / - / -"));
    }
}
