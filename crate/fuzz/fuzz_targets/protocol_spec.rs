#![no_main]

use libfuzzer_sys::fuzz_target;
use smplab_core::io::parse_protocol_spec;
use smplab_core::smp::{run, Protocol};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(spec) = parse_protocol_spec(s) else { return };
    // A spec that builds must also execute without panicking.
    if let Ok(p) = spec.build() {
        let _ = run(&Protocol::Smp(p), 0, 0, 0);
    }
});
