//! Per-vertex UV maps and their text sidecar format.
//!
//! The sidecar is a whitespace-separated table, one `index u v` row per
//! vertex, preceded by `#` header lines:
//!
//! ```text
//! # otgi uv-map
//! # stage area-preserving
//! # corners 0 24 48 72
//! 0 0 0
//! 1 0.041666666666666664 0
//! ```

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{orient2, Vec2};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Conformal,
    AreaPreserving,
    /// Tutte embedding with uniform weights.
    Uniform,
    /// Cotangent-weight harmonic map.
    Harmonic,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Conformal => "conformal",
            Stage::AreaPreserving => "area-preserving",
            Stage::Uniform => "uniform",
            Stage::Harmonic => "harmonic",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "conformal" => Stage::Conformal,
            "area-preserving" => Stage::AreaPreserving,
            "uniform" => Stage::Uniform,
            "harmonic" => Stage::Harmonic,
            other => return Err(Error::Invalid(format!("unknown stage {other:?}"))),
        })
    }
}

/// UV coordinates in the unit square for every mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMap {
    pub uv: Vec<Vec2>,
    pub stage: Stage,
    /// Vertices pinned to (0,0), (1,0), (1,1), (0,1).
    pub corners: [usize; 4],
}

impl ParamMap {
    /// Faces whose UV triangle has non-positive signed area.
    pub fn flipped_faces(&self, mesh: &Mesh) -> Vec<usize> {
        mesh.triangles()
            .iter()
            .enumerate()
            .filter(|(_, t)| orient2(self.uv[t[0]], self.uv[t[1]], self.uv[t[2]]) <= 0.0)
            .map(|(f, _)| f)
            .collect()
    }

    pub fn check_orientation(&self, mesh: &Mesh) -> Result<()> {
        if self.uv.len() != mesh.vertex_count() {
            return Err(Error::Invalid(format!(
                "uv map has {} entries for a mesh with {} vertices",
                self.uv.len(),
                mesh.vertex_count()
            )));
        }
        match self.flipped_faces(mesh).first() {
            Some(&f) => Err(Error::FlippedTriangle(f)),
            None => Ok(()),
        }
    }

    pub fn in_unit_square(&self) -> bool {
        self.uv
            .iter()
            .all(|p| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]))
    }

    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# otgi uv-map")?;
        writeln!(out, "# stage {}", self.stage)?;
        let c = self.corners;
        writeln!(out, "# corners {} {} {} {}", c[0], c[1], c[2], c[3])?;
        for (i, p) in self.uv.iter().enumerate() {
            writeln!(out, "{i} {} {}", p[0], p[1])?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_table(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse_table(&bytes)
    }

    /// Parses the sidecar table. Rows may come in any order but every index
    /// from 0 to the row count must appear exactly once.
    pub fn parse_table(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::parse(0, "uv table is not utf-8"))?;
        let mut stage = None;
        let mut corners = None;
        let mut rows: Vec<(usize, Vec2)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let tokens: Vec<&str> = header.split_whitespace().collect();
                match tokens.as_slice() {
                    ["stage", s] => stage = Some(s.parse::<Stage>()?),
                    ["corners", a, b, c, d] => {
                        let mut out = [0usize; 4];
                        for (slot, tok) in out.iter_mut().zip([a, b, c, d]) {
                            *slot = tok
                                .parse()
                                .map_err(|_| Error::parse(line_no, format!("bad corner {tok:?}")))?;
                        }
                        corners = Some(out);
                    }
                    _ => {}
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [i, u, v] = tokens.as_slice() else {
                return Err(Error::parse(line_no, "expected `index u v`"));
            };
            let i: usize = i
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad index {i:?}")))?;
            let u: f64 = u
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad coordinate {u:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad coordinate {v:?}")))?;
            if !u.is_finite() || !v.is_finite() {
                return Err(Error::parse(line_no, "non-finite coordinate"));
            }
            rows.push((i, [u, v]));
        }
        let n = rows.len();
        let mut uv = vec![[f64::NAN; 2]; n];
        let mut seen = vec![false; n];
        for (i, p) in rows {
            if i >= n || seen[i] {
                return Err(Error::parse(0, format!("index {i} missing, repeated or out of range")));
            }
            seen[i] = true;
            uv[i] = p;
        }
        let stage = stage.ok_or_else(|| Error::parse(0, "uv table lacks a stage header"))?;
        let corners = corners.ok_or_else(|| Error::parse(0, "uv table lacks a corners header"))?;
        if corners.iter().any(|&c| c >= n) {
            return Err(Error::parse(0, "corner index out of range"));
        }
        Ok(ParamMap { uv, stage, corners })
    }
}
