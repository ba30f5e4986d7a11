use std::sync::Arc;

use smplab_core::smp::{
    check_totality, kfold, measure_error, measure_error_on, run, sample_inputs, Coins, EqualityFingerprint,
    EqualityFullDisclosure, EqualityRelation, ErrorMode, HOneWay, HRelation, HSmp, KFold, Protocol,
    RandomnessModel, RelationSpec, SRelation, SmpProtocol, TableProtocol, FRelation,
};

fn echo_table() -> TableProtocol {
    TableProtocol {
        name: "echo".into(),
        model: RandomnessModel::Priv,
        alice_inputs: 4,
        bob_inputs: 1,
        outputs: 4,
        alice_coins: 1,
        bob_coins: 1,
        public_coins: 1,
        referee_coins: 1,
        alice_width: 2,
        bob_width: 0,
        alice: (0..4).map(|x| vec![x]).collect(),
        bob: vec![vec![0]],
        referee: (0..4).map(|a| vec![vec![a]]).collect(),
    }
}

/// Referee flips the full-disclosure answer when its 8-valued coin is 0.
fn noisy_equality(n: u32) -> TableProtocol {
    let size = 1u64 << n;
    TableProtocol {
        name: "noisy_eq".into(),
        model: RandomnessModel::Priv,
        alice_inputs: size,
        bob_inputs: size,
        outputs: 2,
        alice_coins: 1,
        bob_coins: 1,
        public_coins: 1,
        referee_coins: 8,
        alice_width: n,
        bob_width: n,
        alice: (0..size).map(|x| vec![x]).collect(),
        bob: (0..size).map(|y| vec![y]).collect(),
        referee: (0..size)
            .map(|a| {
                (0..size)
                    .map(|b| (0..8).map(|r| u64::from(a == b) ^ u64::from(r == 0)).collect())
                    .collect()
            })
            .collect(),
    }
}

#[test]
fn echo_sends_input() {
    let p = Protocol::smp(echo_table());
    for x in 0..4 {
        let out = run(&p, x, 0, 9).unwrap();
        assert_eq!((out.z, out.bits_alice, out.bits_bob), (x as usize, 2, 0));
    }
}

#[test]
fn fingerprint_collision_probability_by_coin_count() {
    let p = Protocol::smp(EqualityFingerprint::new(4, 3).unwrap());
    let space = p.coin_space();
    assert_eq!(space.public, 1 << 12);
    let ones = (0..space.public as u64)
        .filter(|&public| {
            let coins = Coins {
                public,
                ..Coins::default()
            };
            p.execute(3, 12, &coins).2 == 1
        })
        .count();
    assert_eq!(ones, (1 << 12) / 8);
}

#[test]
fn noisy_referee_error_is_exactly_one_eighth() {
    let p = Protocol::smp(noisy_equality(2));
    let f = EqualityRelation::new(2).unwrap();
    let r = measure_error(&p, &f, ErrorMode::Exhaustive, 0).unwrap();
    assert!(r.per_input.iter().all(|e| e.error == 0.125));
}

#[test]
fn monte_carlo_slack_covers_exact_error() {
    let p = Protocol::smp(EqualityFingerprint::new(3, 2).unwrap());
    let f = EqualityRelation::new(3).unwrap();
    let r = measure_error(&p, &f, ErrorMode::MonteCarlo { trials: 4000 }, 5).unwrap();
    assert!((r.max_error - 0.25).abs() <= r.slack);
    assert!((r.slack - 3.0 / 4000f64.sqrt()).abs() < 1e-15);
}

#[test]
fn h_smp_on_sampled_inputs() {
    let p = Protocol::smp(HSmp::new(16, 5).unwrap());
    let f = HRelation::new(16, false).unwrap();
    let inputs = sample_inputs(&f, 200, 3).unwrap();
    let r = measure_error_on(&p, &f, &inputs, ErrorMode::MonteCarlo { trials: 2000 }, 4).unwrap();
    assert!(r.max_error <= 1.0 / 32.0 + r.slack);
    assert_eq!((r.comm_alice_bits, r.comm_bob_bits), (4 + 5, 2 + 5));
    let promised = HRelation::new(16, true).unwrap();
    let inputs = sample_inputs(&promised, 200, 3).unwrap();
    let r = measure_error_on(&p, &promised, &inputs, ErrorMode::MonteCarlo { trials: 200 }, 4).unwrap();
    assert_eq!(r.max_error, 0.0);
}

#[test]
fn h_one_way_accounting_and_error() {
    for (n, t) in [(4, 1), (16, 5), (64, 3)] {
        let p = Protocol::one_way(HOneWay::new(n, t).unwrap());
        let half = (n as f64).log2() as u32 / 2;
        assert_eq!(p.bits(), (half + t, 0));
    }
    let p = Protocol::one_way(HOneWay::new(4, 2).unwrap());
    let f = HRelation::new(4, false).unwrap();
    let r = measure_error(&p, &f, ErrorMode::Exhaustive, 0).unwrap();
    assert!(r.max_error <= 0.25);
}

#[test]
fn catalog_relations_are_total() {
    check_totality(&EqualityRelation::new(3).unwrap()).unwrap();
    check_totality(&HRelation::new(4, false).unwrap()).unwrap();
    check_totality(&SRelation::new(2).unwrap()).unwrap();
    check_totality(&FRelation::new(2).unwrap()).unwrap();
}

#[test]
fn single_fold_behaves_like_base() {
    let base: Arc<dyn SmpProtocol> = Arc::new(EqualityFingerprint::new(3, 2).unwrap());
    let one = Protocol::smp(KFold::new(base.clone(), 1).unwrap());
    let base = Protocol::Smp(base);
    for x in 0..8 {
        for y in 0..8 {
            for seed in 0..5 {
                assert_eq!(run(&one, x, y, seed).unwrap(), run(&base, x, y, seed).unwrap());
            }
        }
    }
}

#[test]
fn two_fold_fingerprint_worst_success() {
    let (p, f) = kfold(
        Arc::new(EqualityFingerprint::new(2, 3).unwrap()),
        Arc::new(EqualityRelation::new(2).unwrap()),
        2,
    )
    .unwrap();
    let r = measure_error(&Protocol::smp(p), &f, ErrorMode::Exhaustive, 0).unwrap();
    assert!(1.0 - r.max_error >= 1.0 - 2.0 / 8.0);
    assert_eq!(r.per_input.len(), 256);
}

#[test]
fn two_fold_noisy_marginals() {
    let (p, f) = kfold(
        Arc::new(noisy_equality(1)),
        Arc::new(EqualityRelation::new(1).unwrap()),
        2,
    )
    .unwrap();
    // Each copy errs independently with probability 1/8.
    let r = measure_error(&Protocol::smp(p), &f, ErrorMode::Exhaustive, 0).unwrap();
    assert_eq!(r.max_error, 1.0 - (7.0f64 / 8.0).powi(2));
    assert!(f.holds(0, 0, 3));
}

#[test]
fn tilde_private_streams_are_isolated() {
    let protocols: Vec<Arc<dyn SmpProtocol>> = vec![
        Arc::new(KFold::new(Arc::new(EqualityFullDisclosure::new(2).unwrap()), 2).unwrap()),
        Arc::new(noisy_equality(2)),
        Arc::new({
            let mut t = noisy_equality(1);
            t.model = RandomnessModel::TildePriv;
            t.alice_coins = 2;
            t.bob_coins = 3;
            t.alice = vec![vec![0, 1], vec![1, 0]];
            t.bob = vec![vec![0, 1, 0], vec![1, 0, 1]];
            t.referee = (0..2)
                .map(|_| (0..2).map(|_| (0..2 * 3 * 8).map(|v| (v % 2) as u64).collect()).collect())
                .collect();
            t
        }),
    ];
    for p in protocols {
        let space = p.coins();
        let model = p.model();
        for x in 0..p.alice_inputs().min(4) {
            for alice in 0..space.alice.min(4) as u64 {
                let base = Coins {
                    alice,
                    ..Coins::default()
                };
                let m = p.alice_message(x, model.alice_view(&base));
                for bob in 0..space.bob.min(4) as u64 {
                    for referee in 0..space.referee.min(4) as u64 {
                        let c = Coins { bob, referee, ..base };
                        assert_eq!(p.alice_message(x, model.alice_view(&c)), m);
                    }
                }
            }
        }
        for y in 0..p.bob_inputs().min(4) {
            for bob in 0..space.bob.min(4) as u64 {
                let base = Coins {
                    bob,
                    ..Coins::default()
                };
                let m = p.bob_message(y, model.bob_view(&base));
                for alice in 0..space.alice.min(4) as u64 {
                    let c = Coins { alice, ..base };
                    assert_eq!(p.bob_message(y, model.bob_view(&c)), m);
                }
            }
        }
    }
}
