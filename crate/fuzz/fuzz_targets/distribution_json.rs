#![no_main]

use libfuzzer_sys::fuzz_target;
use smplab_core::io::parse_distribution_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_distribution_json(s);
    }
});
