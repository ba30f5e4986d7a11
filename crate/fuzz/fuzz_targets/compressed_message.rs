#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use smplab_core::probcore::Distribution;
use smplab_core::rng::SharedKey;
use smplab_core::substate::{plan_compression, CompressionPlan};

fn plan() -> &'static CompressionPlan {
    static PLAN: OnceLock<CompressionPlan> = OnceLock::new();
    PLAN.get_or_init(|| {
        let rows = [
            Distribution::new(vec![0.7, 0.2, 0.1, 0.0]).unwrap(),
            Distribution::new(vec![0.0, 0.1, 0.3, 0.6]).unwrap(),
        ];
        let reference = Distribution::new(vec![0.35, 0.15, 0.2, 0.3]).unwrap();
        plan_compression(&rows, &reference, 0.2).unwrap()
    })
}

// The Referee must map any received word, valid or not, to an alphabet symbol.
fuzz_target!(|data: (u64, u64, u64)| {
    let (seed, stream, message) = data;
    let symbol = plan().decode(SharedKey::new(seed, 0), stream, message);
    assert!(symbol < 4);
});
