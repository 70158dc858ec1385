//! 16-bit RGB PNG encoding of geometry images plus the JSON sidecar.
//!
//! For `name.png` the normals go to `name.normal.png` and the metadata to
//! `name.meta.json`.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use super::{check_power_of_two, GeometryImage, ImageMeta};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// One quantization step of a stored channel.
pub const QUANT_STEP: f64 = 1.0 / 65535.0;

/// Largest image side accepted on decode.
const MAX_SIDE: u32 = 1 << 13;

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = match path.extension() {
        Some(ext) if ext.eq_ignore_ascii_case("png") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let mut name = stem.into_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn normal_path(path: &Path) -> PathBuf {
    with_suffix(path, ".normal.png")
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    with_suffix(path, ".meta.json")
}

fn quantize(x: f64) -> u16 {
    (x.clamp(0.0, 1.0) * 65535.0).round() as u16
}

/// Encodes `values` (row-major, `resolution` per side, channels in [0,1])
/// as a 16-bit RGB PNG.
pub fn encode_png(resolution: usize, values: &[Vec3]) -> Result<Vec<u8>> {
    check_power_of_two(resolution)?;
    if values.len() != resolution * resolution {
        return Err(Error::Image(format!(
            "{} pixels for a {resolution}x{resolution} image",
            values.len()
        )));
    }
    let mut data = Vec::with_capacity(values.len() * 6);
    for p in values {
        for &c in p {
            data.extend_from_slice(&quantize(c).to_be_bytes());
        }
    }
    let mut out = Vec::new();
    {
        let side = resolution as u32;
        let mut enc = png::Encoder::new(&mut out, side, side);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut writer = enc.write_header().map_err(|e| Error::Image(e.to_string()))?;
        writer.write_image_data(&data).map_err(|e| Error::Image(e.to_string()))?;
        writer.finish().map_err(|e| Error::Image(e.to_string()))?;
    }
    Ok(out)
}

/// Decodes a square, power-of-two, 16-bit RGB PNG into channel values in
/// [0,1].
pub fn decode_png(bytes: &[u8]) -> Result<(usize, Vec<Vec3>)> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| Error::Image(e.to_string()))?;
    let info = reader.info();
    let (w, h) = (info.width, info.height);
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Sixteen {
        return Err(Error::Image(format!(
            "expected 16-bit RGB, found {:?} at {:?}",
            info.color_type, info.bit_depth
        )));
    }
    if w != h {
        return Err(Error::Image(format!("image is {w}x{h}, not square")));
    }
    if w > MAX_SIDE {
        return Err(Error::Image(format!("image side {w} exceeds {MAX_SIDE}")));
    }
    let res = w as usize;
    check_power_of_two(res)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Image("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| Error::Image(e.to_string()))?;
    let data = &buf[..frame.buffer_size()];
    if data.len() != res * res * 6 {
        return Err(Error::Image("unexpected pixel buffer size".into()));
    }
    let values = data
        .chunks_exact(6)
        .map(|px| [0, 1, 2].map(|k| u16::from_be_bytes([px[2 * k], px[2 * k + 1]]) as f64 / 65535.0))
        .collect();
    Ok((res, values))
}

fn parse_sidecar(bytes: &[u8]) -> Result<ImageMeta> {
    let meta: ImageMeta =
        serde_json::from_slice(bytes).map_err(|e| Error::Image(format!("bad sidecar: {e}")))?;
    for k in 0..3 {
        let (lo, hi) = (meta.bbox_min[k], meta.bbox_max[k]);
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Image(format!("bad bounding box on axis {k}")));
        }
    }
    Ok(meta)
}

/// Builds an image from in-memory PNG and sidecar bytes.
pub fn decode_image(position_png: &[u8], normal_png: Option<&[u8]>, sidecar: &[u8]) -> Result<GeometryImage> {
    let meta = parse_sidecar(sidecar)?;
    let (res, positions) = decode_png(position_png)?;
    if res != meta.resolution {
        return Err(Error::Image(format!(
            "sidecar resolution {} does not match image size {res}",
            meta.resolution
        )));
    }
    let normals = match normal_png {
        Some(bytes) => {
            let (nres, raw) = decode_png(bytes)?;
            if nres != res {
                return Err(Error::Image(format!("normal image is {nres} wide, positions {res}")));
            }
            Some(raw.into_iter().map(|c| c.map(|x| 2.0 * x - 1.0)).collect())
        }
        None => None,
    };
    Ok(GeometryImage {
        meta,
        positions,
        normals,
        coverage: vec![true; res * res],
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `path`, the sidecar and, when present, the normal image.
pub fn save_image(image: &GeometryImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let res = image.meta.resolution;
    write_file(path, &encode_png(res, &image.positions)?)?;
    if let Some(normals) = &image.normals {
        let remapped: Vec<Vec3> = normals.iter().map(|n| n.map(|x| 0.5 * x + 0.5)).collect();
        write_file(&normal_path(path), &encode_png(res, &remapped)?)?;
    }
    let json = serde_json::to_vec_pretty(&image.meta).map_err(|e| Error::Image(e.to_string()))?;
    write_file(&sidecar_path(path), &json)
}

/// Reads an image written by [`save_image`]. The sidecar is required; the
/// normal image is optional.
pub fn load_image(path: impl AsRef<Path>) -> Result<GeometryImage> {
    let path = path.as_ref();
    let png = fs::read(path).map_err(|e| Error::io(path, e))?;
    let meta_path = sidecar_path(path);
    if !meta_path.exists() {
        return Err(Error::MissingSidecar(meta_path));
    }
    let sidecar = fs::read(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let npath = normal_path(path);
    let normal = if npath.exists() {
        Some(fs::read(&npath).map_err(|e| Error::io(&npath, e))?)
    } else {
        None
    };
    decode_image(&png, normal.as_deref(), &sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(res: usize, seed: u64) -> GeometryImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = res * res;
        GeometryImage {
            meta: ImageMeta {
                bbox_min: [-0.1, 1.0 / 3.0, 2.0],
                bbox_max: [0.7, 1.0, 2.0],
                resolution: res,
                level: 2,
                source: "random".into(),
            },
            positions: (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect(),
            normals: Some(
                (0..n)
                    .map(|_| {
                        let a: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                        [a.cos() * 0.6, a.sin() * 0.6, 0.8]
                    })
                    .collect(),
            ),
            coverage: vec![true; n],
        }
    }

    #[test]
    fn endpoints_map_exactly() {
        assert_eq!(quantize(1.0), 65535);
        assert_eq!(quantize(0.0), 0);
        let bytes = encode_png(1, &[[0.0, 1.0, 0.5]]).unwrap();
        let (_, v) = decode_png(&bytes).unwrap();
        assert_eq!(v[0][0], 0.0);
        assert_eq!(v[0][1], 1.0);
    }

    #[test]
    fn file_roundtrip_within_half_a_step() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = sample(16, 3);
        save_image(&img, &path).unwrap();
        assert!(dir.path().join("img.normal.png").exists());
        assert!(dir.path().join("img.meta.json").exists());
        let back = load_image(&path).unwrap();
        assert_eq!(back.meta, img.meta);
        for (a, b) in back.positions.iter().zip(&img.positions) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 0.5 * QUANT_STEP + 1e-15);
            }
        }
        for n in back.normals.as_ref().unwrap() {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            assert!((len - 1.0).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn missing_sidecar_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lonely.png");
        fs::write(&path, encode_png(2, &[[0.0; 3]; 4]).unwrap()).unwrap();
        assert!(matches!(load_image(&path), Err(Error::MissingSidecar(_))));
    }

    #[test]
    fn rejects_wrong_formats() {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, 4, 4);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[0u8; 48]).unwrap();
        }
        assert!(matches!(decode_png(&out), Err(Error::Image(_))));
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, 6, 6);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Sixteen);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[0u8; 216]).unwrap();
        }
        assert!(matches!(decode_png(&out), Err(Error::NotPowerOfTwo(6))));
        assert!(decode_png(b"not a png").is_err());
    }

    #[test]
    fn sidecar_paths() {
        assert_eq!(sidecar_path(Path::new("a/b.png")), PathBuf::from("a/b.meta.json"));
        assert_eq!(normal_path(Path::new("a/b.png")), PathBuf::from("a/b.normal.png"));
    }
}
