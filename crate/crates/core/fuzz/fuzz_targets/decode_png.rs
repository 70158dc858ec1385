#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((res, values)) = otgi::image::decode_png(data) {
        assert_eq!(values.len(), res * res);
    }
});
