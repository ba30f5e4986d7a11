#![no_main]

use libfuzzer_sys::fuzz_target;
use smplab_core::io::parse_relation_spec;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_relation_spec(s).and_then(|spec| spec.build()) {
        let _ = f.holds(0, 0, 0);
        let _ = f.promised(0, 0);
    }
});
