#![no_main]

use libfuzzer_sys::fuzz_target;
use otgi::mesh::{parse_obj, validate_topology};

fuzz_target!(|data: &[u8]| {
    if let Ok(mesh) = parse_obj(data) {
        let _ = validate_topology(&mesh);
        let _ = mesh.boundary_loops();
    }
});
