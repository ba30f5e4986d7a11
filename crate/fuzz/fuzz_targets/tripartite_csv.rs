#![no_main]

use libfuzzer_sys::fuzz_target;
use smplab_core::io::parse_tripartite_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_tripartite_csv(s);
    }
});
