#![no_main]

use libfuzzer_sys::fuzz_target;

// First two bytes (big endian) give the sidecar length; the sidecar
// follows, then the position PNG.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let n = (u16::from_be_bytes([data[0], data[1]]) as usize).min(data.len() - 2);
    let (sidecar, png) = data[2..].split_at(n);
    if let Ok(img) = otgi::image::decode_image(png, None, sidecar) {
        let _ = otgi::extract::extract_mesh(&img);
    }
});
