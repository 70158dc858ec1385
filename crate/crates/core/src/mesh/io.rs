//! OBJ and PLY readers, OBJ writer.
//!
//! The readers accept untrusted bytes and never panic; every malformed input
//! surfaces as an [`Error`].

use std::fs;
use std::io::Write;
use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Loads an OBJ or PLY file. The format is chosen by the `ply` magic bytes,
/// not by the extension.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"ply") {
        parse_ply(&bytes)
    } else {
        parse_obj(&bytes)
    }
}

/// Parses Wavefront OBJ `v` and `f` records. Other records are ignored.
/// Face tokens may be `i`, `i/t`, `i//n` or `i/t/n`; negative indices are
/// relative to the current end of the vertex list.
pub fn parse_obj(bytes: &[u8]) -> Result<Mesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("not utf-8: {e}")))?;
    let mut positions: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for c in &mut p {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| Error::parse(line, "vertex needs three coordinates"))?;
                    *c = tok
                        .parse::<f64>()
                        .map_err(|_| Error::parse(line, format!("bad coordinate {tok:?}")))?;
                }
                positions.push(p);
            }
            Some("f") => {
                let corners: Vec<&str> = tokens.collect();
                if corners.len() != 3 {
                    return Err(Error::NonTriangleFace {
                        face: triangles.len(),
                        count: corners.len(),
                    });
                }
                let mut tri = [0usize; 3];
                for (slot, tok) in tri.iter_mut().zip(&corners) {
                    *slot = obj_index(tok, positions.len(), line)?;
                }
                triangles.push(tri);
            }
            _ => {}
        }
    }
    Mesh::new(positions, triangles)
}

fn obj_index(token: &str, vertex_count: usize, line: usize) -> Result<usize> {
    let head = token.split('/').next().unwrap_or("");
    let idx: i64 = head
        .parse()
        .map_err(|_| Error::parse(line, format!("bad face index {token:?}")))?;
    let resolved = if idx > 0 {
        idx - 1
    } else if idx < 0 {
        vertex_count as i64 + idx
    } else {
        -1
    };
    if resolved < 0 || resolved as usize >= vertex_count {
        return Err(Error::parse(line, format!("face index {idx} out of range")));
    }
    Ok(resolved as usize)
}

pub fn write_obj<W: Write>(mesh: &Mesh, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# {} vertices, {} triangles",
        mesh.vertex_count(),
        mesh.face_count()
    )?;
    // `Display` for f64 prints the shortest string that parses back to the
    // same bits.
    for p in mesh.positions() {
        writeln!(out, "v {} {} {}", p[0], p[1], p[2])?;
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

pub fn save_obj(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_obj(mesh, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn from_name(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Parses ASCII or binary little-endian PLY with a `vertex` element carrying
/// `x y z` and a `face` element carrying a `vertex_indices` (or
/// `vertex_index`) list.
pub fn parse_ply(bytes: &[u8]) -> Result<Mesh> {
    let (format, elements, body_start) = parse_ply_header(bytes)?;
    let mut reader: Box<dyn ValueReader> = match format {
        PlyFormat::Ascii => {
            let body = std::str::from_utf8(&bytes[body_start..])
                .map_err(|_| Error::parse(0, "ascii ply body is not utf-8"))?;
            Box::new(AsciiReader {
                tokens: body.split_ascii_whitespace(),
            })
        }
        PlyFormat::BinaryLittleEndian => Box::new(BinaryReader {
            data: &bytes[body_start..],
            pos: 0,
        }),
    };

    let mut positions: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let remaining = bytes.len().saturating_sub(body_start);
    for element in &elements {
        match element.name.as_str() {
            "vertex" => {
                let slots: Vec<Option<usize>> = element
                    .properties
                    .iter()
                    .map(|p| match p {
                        Property::Scalar { name, .. } => match name.as_str() {
                            "x" => Some(0),
                            "y" => Some(1),
                            "z" => Some(2),
                            _ => None,
                        },
                        Property::List { .. } => None,
                    })
                    .collect();
                for axis in 0..3 {
                    if !slots.contains(&Some(axis)) {
                        return Err(Error::parse(0, "vertex element lacks x, y or z"));
                    }
                }
                positions.reserve(element.count.min(remaining));
                for _ in 0..element.count {
                    let mut p = [0.0; 3];
                    for (prop, slot) in element.properties.iter().zip(&slots) {
                        match prop {
                            Property::Scalar { ty, .. } => {
                                let v = reader.read(*ty)?;
                                if let Some(axis) = slot {
                                    p[*axis] = v;
                                }
                            }
                            Property::List { count, item, .. } => {
                                let n = list_len(reader.read(*count)?)?;
                                for _ in 0..n {
                                    reader.read(*item)?;
                                }
                            }
                        }
                    }
                    positions.push(p);
                }
            }
            "face" => {
                triangles.reserve(element.count.min(remaining));
                for face in 0..element.count {
                    let mut found = false;
                    for prop in &element.properties {
                        match prop {
                            Property::Scalar { ty, .. } => {
                                reader.read(*ty)?;
                            }
                            Property::List { name, count, item } => {
                                let n = list_len(reader.read(*count)?)?;
                                let is_indices = name == "vertex_indices" || name == "vertex_index";
                                if is_indices && n != 3 {
                                    return Err(Error::NonTriangleFace { face, count: n });
                                }
                                let mut tri = [0usize; 3];
                                for k in 0..n {
                                    let v = reader.read(*item)?;
                                    if is_indices {
                                        if v < 0.0 || v.fract() != 0.0 || v > usize::MAX as f64 {
                                            return Err(Error::parse(0, format!("bad face index {v}")));
                                        }
                                        tri[k] = v as usize;
                                    }
                                }
                                if is_indices {
                                    found = true;
                                    triangles.push(tri);
                                }
                            }
                        }
                    }
                    if !found {
                        return Err(Error::parse(0, "face element lacks vertex_indices"));
                    }
                }
            }
            _ => {
                if element.properties.is_empty() {
                    continue;
                }
                for _ in 0..element.count {
                    for prop in &element.properties {
                        match prop {
                            Property::Scalar { ty, .. } => {
                                reader.read(*ty)?;
                            }
                            Property::List { count, item, .. } => {
                                let n = list_len(reader.read(*count)?)?;
                                for _ in 0..n {
                                    reader.read(*item)?;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Mesh::new(positions, triangles)
}

fn list_len(v: f64) -> Result<usize> {
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::parse(0, format!("bad list length {v}")));
    }
    Ok(v as usize)
}

fn parse_ply_header(bytes: &[u8]) -> Result<(PlyFormat, Vec<Element>, usize)> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| Error::parse(0, "ply header has no end_header"))?;
    let mut body_start = end + END.len();
    if bytes.get(body_start) == Some(&b'\r') {
        body_start += 1;
    }
    if bytes.get(body_start) == Some(&b'\n') {
        body_start += 1;
    }
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| Error::parse(0, "ply header is not utf-8"))?;
    let mut lines = header.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(Error::parse(1, "missing ply magic")),
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for (i, l) in lines {
        let line = i + 1;
        let tokens: Vec<&str> = l.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => format = Some(PlyFormat::Ascii),
            ["format", "binary_little_endian", _] => format = Some(PlyFormat::BinaryLittleEndian),
            ["format", other, ..] => {
                return Err(Error::parse(line, format!("unsupported ply format {other}")))
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad element count {count:?}")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count, item, name] => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(line, "property before element"))?;
                let count = Scalar::from_name(count)
                    .ok_or_else(|| Error::parse(line, format!("unknown type {count}")))?;
                let item = Scalar::from_name(item)
                    .ok_or_else(|| Error::parse(line, format!("unknown type {item}")))?;
                element.properties.push(Property::List {
                    name: name.to_string(),
                    count,
                    item,
                });
            }
            ["property", ty, name] => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(line, "property before element"))?;
                let ty = Scalar::from_name(ty)
                    .ok_or_else(|| Error::parse(line, format!("unknown type {ty}")))?;
                element.properties.push(Property::Scalar {
                    name: name.to_string(),
                    ty,
                });
            }
            _ => return Err(Error::parse(line, format!("unrecognized header line {l:?}"))),
        }
    }
    let format = format.ok_or_else(|| Error::parse(0, "ply header has no format line"))?;
    Ok((format, elements, body_start))
}

trait ValueReader {
    fn read(&mut self, ty: Scalar) -> Result<f64>;
}

struct AsciiReader<'a> {
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl ValueReader for AsciiReader<'_> {
    fn read(&mut self, _ty: Scalar) -> Result<f64> {
        let tok = self
            .tokens
            .next()
            .ok_or_else(|| Error::parse(0, "unexpected end of ply body"))?;
        tok.parse::<f64>()
            .map_err(|_| Error::parse(0, format!("bad ply value {tok:?}")))
    }
}

struct BinaryReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl ValueReader for BinaryReader<'_> {
    fn read(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        let bytes = self
            .data
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::parse(0, "unexpected end of ply body"))?;
        self.pos += n;
        let mut buf = [0u8; 8];
        buf[..n].copy_from_slice(bytes);
        Ok(match ty {
            Scalar::I8 => buf[0] as i8 as f64,
            Scalar::U8 => buf[0] as f64,
            Scalar::I16 => i16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(buf),
        })
    }
}
