//! Every checked-in fuzz seed is a valid input for its entry point.

use std::fs;
use std::path::PathBuf;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn mesh_seeds_parse() {
    for (name, bytes) in seeds("parse_obj") {
        otgi::mesh::parse_obj(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, bytes) in seeds("parse_ply") {
        let m = otgi::mesh::parse_ply(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(m.face_count(), 1);
    }
}

#[test]
fn image_seeds_decode() {
    for (name, bytes) in seeds("decode_png") {
        otgi::image::decode_png(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, bytes) in seeds("decode_image") {
        let n = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
        let (sidecar, png) = bytes[2..].split_at(n);
        otgi::image::decode_image(png, None, sidecar).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn uv_seeds_parse() {
    for (name, bytes) in seeds("parse_uv_table") {
        otgi::ParamMap::parse_table(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
