//! Replays the checked-in fuzz corpus through the same entry points the fuzz
//! targets exercise.

use std::fs;
use std::path::PathBuf;

use smplab_core::io;
use smplab_core::probcore::Distribution;
use smplab_core::rng::SharedKey;
use smplab_core::smp::{run, Protocol};
use smplab_core::substate::plan_compression;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut paths: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    assert!(!paths.is_empty(), "empty corpus for {target}");
    paths.iter().map(|p| fs::read(p).unwrap()).collect()
}

fn texts(target: &str) -> Vec<String> {
    seeds(target)
        .into_iter()
        .map(|b| String::from_utf8(b).expect("text seeds are UTF-8"))
        .collect()
}

#[test]
fn text_parsers() {
    let ok = |r: bool| usize::from(r);
    let mut accepted = 0;
    for s in texts("distribution_csv") {
        accepted += ok(io::parse_distribution_csv(&s).is_ok());
    }
    for s in texts("distribution_json") {
        accepted += ok(io::parse_distribution_json(&s).is_ok());
    }
    for s in texts("joint_csv") {
        accepted += ok(io::parse_joint_csv(&s).is_ok());
    }
    for s in texts("joint_json") {
        accepted += ok(io::parse_joint_json(&s).is_ok());
    }
    for s in texts("tripartite_csv") {
        accepted += ok(io::parse_tripartite_csv(&s).is_ok());
    }
    for s in texts("tripartite_json") {
        accepted += ok(io::parse_tripartite_json(&s).is_ok());
    }
    for s in texts("channel_csv") {
        accepted += ok(io::parse_channel_csv(&s).is_ok());
    }
    for s in texts("channel_json") {
        accepted += ok(io::parse_channel_json(&s).is_ok());
    }
    // Every seed except the duplicate-outcome and ragged ones is well formed.
    assert_eq!(accepted, 11);
}

#[test]
fn specs_build_and_run() {
    for s in texts("protocol_spec") {
        let p = io::parse_protocol_spec(&s).unwrap().build().unwrap();
        run(&Protocol::Smp(p), 0, 0, 0).unwrap();
    }
    for s in texts("relation_spec") {
        let f = io::parse_relation_spec(&s).unwrap().build().unwrap();
        let _ = f.holds(0, 0, 0);
    }
}

#[test]
fn compressed_messages_decode_in_range() {
    let rows = [
        Distribution::new(vec![0.7, 0.2, 0.1, 0.0]).unwrap(),
        Distribution::new(vec![0.0, 0.1, 0.3, 0.6]).unwrap(),
    ];
    let reference = Distribution::new(vec![0.35, 0.15, 0.2, 0.3]).unwrap();
    let plan = plan_compression(&rows, &reference, 0.2).unwrap();
    for bytes in seeds("compressed_message") {
        let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
        let symbol = plan.decode(SharedKey::new(word(0), 0), word(1), word(2));
        assert!(symbol < 4);
    }
}
