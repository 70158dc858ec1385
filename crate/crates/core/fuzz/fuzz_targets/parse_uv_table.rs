#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(map) = otgi::ParamMap::parse_table(data) {
        let mut out = Vec::new();
        map.write_table(&mut out).unwrap();
        assert_eq!(otgi::ParamMap::parse_table(&out).unwrap(), map);
    }
});
