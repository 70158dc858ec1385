#![no_main]

use libfuzzer_sys::fuzz_target;
use otgi::mesh::{parse_ply, validate_topology};

fuzz_target!(|data: &[u8]| {
    if let Ok(mesh) = parse_ply(data) {
        let _ = validate_topology(&mesh);
    }
});
