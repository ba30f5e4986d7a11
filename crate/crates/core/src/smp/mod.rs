//! Executable simultaneous-message and one-way protocols.
//!
//! Inputs are flat `u128` indices, messages are fixed-width bit strings
//! packed into a `u64`, and outputs are `usize` indices. Randomness comes as
//! one atom per source (Alice, Bob, public, Referee); each source has a
//! declared number of equally likely atoms, at most `2^64`.

mod catalog;
mod kfold;
mod rac;
mod table;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::{domain, SharedKey, Stream};

pub use catalog::{
    ceil_log2, EqualityFingerprint, EqualityFullDisclosure, EqualityRelation, FOneWay, FRelation,
    FSmp, HOneWay, HRelation, HSmp, SOneWay, SRelation,
};
pub use kfold::{kfold, KFold, KFoldRelation};
pub use rac::{nayak_certificate, rac_bruteforce, rac_feasible, NayakCertificate, RacOptimum};
pub use table::{TableProtocol, TableRelation};

/// A source with this many atoms is a full 64-bit seed.
pub const FULL_SEED: u128 = 1 << 64;
/// Largest coin space enumerated exactly.
pub const MAX_ENUMERATED_COINS: u128 = 1 << 20;
/// Largest input domain `|X|·|Y|` swept exhaustively.
pub const MAX_ENUMERATED_INPUTS: u128 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomnessModel {
    /// Each player has private coins; the Referee sees none of them.
    Priv,
    /// Alice shares coins with the Referee, Bob shares other coins with the
    /// Referee; Alice and Bob share nothing.
    TildePriv,
    /// Additionally a public coin seen by everyone.
    Pub,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoinSpace {
    pub alice: u128,
    pub bob: u128,
    pub public: u128,
    pub referee: u128,
}

impl CoinSpace {
    pub const NONE: CoinSpace = CoinSpace {
        alice: 1,
        bob: 1,
        public: 1,
        referee: 1,
    };

    pub fn public_only(public: u128) -> Self {
        CoinSpace { public, ..CoinSpace::NONE }
    }

    fn sizes(&self) -> [u128; 4] {
        [self.alice, self.bob, self.public, self.referee]
    }

    /// Number of joint atoms, if it fits.
    pub fn total(&self) -> Option<u128> {
        self.sizes().iter().try_fold(1u128, |acc, s| acc.checked_mul(*s))
    }

    pub fn enumerable(&self) -> bool {
        self.total().is_some_and(|t| t <= MAX_ENUMERATED_COINS)
    }

    pub fn validate(&self, model: RandomnessModel) -> Result<()> {
        if self.sizes().iter().any(|s| *s == 0 || *s > FULL_SEED) {
            return Err(param("coin spaces must have between 1 and 2^64 atoms"));
        }
        if self.public != 1 && model != RandomnessModel::Pub {
            return Err(param("public coins require the public-coin model"));
        }
        Ok(())
    }

    fn atom(&self, mut index: u128) -> Coins {
        let referee = (index % self.referee) as u64;
        index /= self.referee;
        let public = (index % self.public) as u64;
        index /= self.public;
        let bob = (index % self.bob) as u64;
        index /= self.bob;
        Coins {
            alice: index as u64,
            bob,
            public,
            referee,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Coins {
    pub alice: u64,
    pub bob: u64,
    pub public: u64,
    pub referee: u64,
}

/// What a player sees: its own coins and the public coin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlayerView {
    pub own: u64,
    pub public: u64,
}

/// What the Referee sees. Player coins are `None` in the private model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefereeView {
    pub alice: Option<u64>,
    pub bob: Option<u64>,
    pub public: u64,
    pub own: u64,
}

impl RandomnessModel {
    pub fn alice_view(self, c: &Coins) -> PlayerView {
        PlayerView {
            own: c.alice,
            public: c.public,
        }
    }

    pub fn bob_view(self, c: &Coins) -> PlayerView {
        PlayerView {
            own: c.bob,
            public: c.public,
        }
    }

    pub fn referee_view(self, c: &Coins) -> RefereeView {
        let shared = self != RandomnessModel::Priv;
        RefereeView {
            alice: shared.then_some(c.alice),
            bob: shared.then_some(c.bob),
            public: c.public,
            own: c.referee,
        }
    }
}

pub trait SmpProtocol: Send + Sync {
    fn name(&self) -> String;
    fn model(&self) -> RandomnessModel;
    fn alice_inputs(&self) -> u128;
    fn bob_inputs(&self) -> u128;
    fn outputs(&self) -> usize;
    fn coins(&self) -> CoinSpace;
    fn alice_width(&self) -> u32;
    fn bob_width(&self) -> u32;
    fn alice_message(&self, x: u128, coins: PlayerView) -> u64;
    fn bob_message(&self, y: u128, coins: PlayerView) -> u64;
    fn referee(&self, alice: u64, bob: u64, coins: RefereeView) -> usize;
    fn promised(&self, _x: u128, _y: u128) -> bool {
        true
    }
}

/// One player sends a single message; the other produces the output.
pub trait OneWayProtocol: Send + Sync {
    fn name(&self) -> String;
    fn sender(&self) -> Party;
    fn alice_inputs(&self) -> u128;
    fn bob_inputs(&self) -> u128;
    fn outputs(&self) -> usize;
    fn public_coins(&self) -> u128 {
        1
    }
    fn width(&self) -> u32;
    fn message(&self, sender_input: u128, public: u64) -> u64;
    fn output(&self, receiver_input: u128, message: u64, public: u64) -> usize;
    fn promised(&self, _x: u128, _y: u128) -> bool {
        true
    }
}

pub trait RelationSpec: Send + Sync {
    fn name(&self) -> String;
    fn alice_inputs(&self) -> u128;
    fn bob_inputs(&self) -> u128;
    fn outputs(&self) -> usize;
    fn holds(&self, x: u128, y: u128, z: usize) -> bool;
    fn promised(&self, _x: u128, _y: u128) -> bool {
        true
    }
    /// A promised input pair, drawn from `stream`. The default rejects
    /// uniform pairs and gives up after `2^16` attempts.
    fn sample_promised(&self, stream: &mut Stream) -> Option<(u128, u128)> {
        (0..1 << 16).find_map(|_| {
            let x = stream.below_wide(self.alice_inputs());
            let y = stream.below_wide(self.bob_inputs());
            self.promised(x, y).then_some((x, y))
        })
    }
}

/// Checks that every promised pair has a valid output.
pub fn check_totality(f: &dyn RelationSpec) -> Result<()> {
    let (nx, ny) = (f.alice_inputs(), f.bob_inputs());
    if nx.checked_mul(ny).map_or(true, |n| n > MAX_ENUMERATED_INPUTS) {
        return Err(Error::NotEnumerable(format!("{nx}×{ny} inputs")));
    }
    for x in 0..nx {
        for y in 0..ny {
            if f.promised(x, y) && !(0..f.outputs()).any(|z| f.holds(x, y, z)) {
                return Err(Error::Contract(format!(
                    "relation {} has no valid output on promised input ({x}, {y})",
                    f.name()
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone)]
pub enum Protocol {
    Smp(Arc<dyn SmpProtocol>),
    OneWay(Arc<dyn OneWayProtocol>),
}

impl Protocol {
    pub fn smp(p: impl SmpProtocol + 'static) -> Self {
        Protocol::Smp(Arc::new(p))
    }

    pub fn one_way(p: impl OneWayProtocol + 'static) -> Self {
        Protocol::OneWay(Arc::new(p))
    }

    pub fn name(&self) -> String {
        match self {
            Protocol::Smp(p) => p.name(),
            Protocol::OneWay(p) => p.name(),
        }
    }

    pub fn alice_inputs(&self) -> u128 {
        match self {
            Protocol::Smp(p) => p.alice_inputs(),
            Protocol::OneWay(p) => p.alice_inputs(),
        }
    }

    pub fn bob_inputs(&self) -> u128 {
        match self {
            Protocol::Smp(p) => p.bob_inputs(),
            Protocol::OneWay(p) => p.bob_inputs(),
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            Protocol::Smp(p) => p.outputs(),
            Protocol::OneWay(p) => p.outputs(),
        }
    }

    pub fn coin_space(&self) -> CoinSpace {
        match self {
            Protocol::Smp(p) => p.coins(),
            Protocol::OneWay(p) => CoinSpace::public_only(p.public_coins()),
        }
    }

    /// Bits sent by Alice and by Bob.
    pub fn bits(&self) -> (u32, u32) {
        match self {
            Protocol::Smp(p) => (p.alice_width(), p.bob_width()),
            Protocol::OneWay(p) => match p.sender() {
                Party::Alice => (p.width(), 0),
                Party::Bob => (0, p.width()),
            },
        }
    }

    pub fn promised(&self, x: u128, y: u128) -> bool {
        match self {
            Protocol::Smp(p) => p.promised(x, y),
            Protocol::OneWay(p) => p.promised(x, y),
        }
    }

    /// Messages sent by Alice and Bob, and the output.
    pub fn execute(&self, x: u128, y: u128, coins: &Coins) -> (u64, u64, usize) {
        match self {
            Protocol::Smp(p) => {
                let model = p.model();
                let ma = p.alice_message(x, model.alice_view(coins));
                let mb = p.bob_message(y, model.bob_view(coins));
                (ma, mb, p.referee(ma, mb, model.referee_view(coins)))
            }
            Protocol::OneWay(p) => match p.sender() {
                Party::Alice => {
                    let m = p.message(x, coins.public);
                    (m, 0, p.output(y, m, coins.public))
                }
                Party::Bob => {
                    let m = p.message(y, coins.public);
                    (0, m, p.output(x, m, coins.public))
                }
            },
        }
    }

    fn check_input(&self, x: u128, y: u128) -> Result<()> {
        if x >= self.alice_inputs() || y >= self.bob_inputs() {
            return Err(Error::InputOutOfRange(format!(
                "({x}, {y}) outside {}×{}",
                self.alice_inputs(),
                self.bob_inputs()
            )));
        }
        if !self.promised(x, y) {
            return Err(Error::PromiseViolation { x, y });
        }
        Ok(())
    }
}

/// Draws one atom per source from domain-separated streams.
pub fn sample_coins(space: &CoinSpace, key: SharedKey, stream: u64) -> Coins {
    let draw = |dom: u64, size: u128| key.with_domain(dom).stream(stream).below(size);
    Coins {
        alice: draw(domain::ALICE, space.alice),
        bob: draw(domain::BOB, space.bob),
        public: draw(domain::PUBLIC, space.public),
        referee: draw(domain::REFEREE, space.referee),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RunOutcome {
    pub z: usize,
    pub alice_message: u64,
    pub bob_message: u64,
    pub bits_alice: u32,
    pub bits_bob: u32,
}

pub fn run(p: &Protocol, x: u128, y: u128, seed: u64) -> Result<RunOutcome> {
    p.check_input(x, y)?;
    let coins = sample_coins(&p.coin_space(), SharedKey::new(seed, 0), 0);
    let (alice_message, bob_message, z) = p.execute(x, y, &coins);
    let (bits_alice, bits_bob) = p.bits();
    Ok(RunOutcome {
        z,
        alice_message,
        bob_message,
        bits_alice,
        bits_bob,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ErrorMode {
    Exhaustive,
    MonteCarlo { trials: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InputError {
    pub x: u128,
    pub y: u128,
    pub wrong: u64,
    pub total: u64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub max_error: f64,
    pub worst_input: Option<(u128, u128)>,
    /// `3·√(1/T)` in Monte-Carlo mode, 0 when exact.
    pub slack: f64,
    pub mode: ErrorMode,
    pub comm_alice_bits: u32,
    pub comm_bob_bits: u32,
    pub per_input: Vec<InputError>,
}

fn check_shapes(p: &Protocol, f: &dyn RelationSpec) -> Result<()> {
    if p.alice_inputs() != f.alice_inputs()
        || p.bob_inputs() != f.bob_inputs()
        || p.outputs() != f.outputs()
    {
        return Err(param(format!(
            "protocol {} and relation {} disagree on input or output sizes",
            p.name(),
            f.name()
        )));
    }
    Ok(())
}

fn input_key(seed: u64, x: u128, y: u128) -> SharedKey {
    SharedKey::new(seed, domain::TRIALS)
        .derive(x as u64)
        .derive((x >> 64) as u64)
        .derive(y as u64)
        .derive((y >> 64) as u64)
}

fn error_at(p: &Protocol, f: &dyn RelationSpec, x: u128, y: u128, mode: ErrorMode, seed: u64) -> InputError {
    let space = p.coin_space();
    let (wrong, total) = match mode {
        ErrorMode::Exhaustive => {
            let total = space.total().unwrap_or(u128::MAX);
            let wrong = (0..total)
                .filter(|&i| {
                    let (_, _, z) = p.execute(x, y, &space.atom(i));
                    !f.holds(x, y, z)
                })
                .count();
            (wrong as u64, total as u64)
        }
        ErrorMode::MonteCarlo { trials } => {
            let key = input_key(seed, x, y);
            let wrong = (0..trials)
                .filter(|&t| {
                    let (_, _, z) = p.execute(x, y, &sample_coins(&space, key, t));
                    !f.holds(x, y, z)
                })
                .count();
            (wrong as u64, trials)
        }
    };
    InputError {
        x,
        y,
        wrong,
        total,
        error: wrong as f64 / total as f64,
    }
}

/// Error of `p` on each listed input, all of which must be promised by `f`.
pub fn measure_error_on(
    p: &Protocol,
    f: &dyn RelationSpec,
    inputs: &[(u128, u128)],
    mode: ErrorMode,
    seed: u64,
) -> Result<ErrorReport> {
    check_shapes(p, f)?;
    let slack = match mode {
        ErrorMode::Exhaustive => {
            if !p.coin_space().enumerable() {
                return Err(Error::NotEnumerable(format!(
                    "coin space of {} exceeds {MAX_ENUMERATED_COINS} atoms",
                    p.name()
                )));
            }
            0.0
        }
        ErrorMode::MonteCarlo { trials } => {
            if trials == 0 {
                return Err(param("need at least one trial"));
            }
            3.0 * (1.0 / trials as f64).sqrt()
        }
    };
    for &(x, y) in inputs {
        if x >= f.alice_inputs() || y >= f.bob_inputs() {
            return Err(Error::InputOutOfRange(format!("({x}, {y})")));
        }
        if !f.promised(x, y) {
            return Err(Error::PromiseViolation { x, y });
        }
    }
    let per_input: Vec<InputError> = inputs
        .par_iter()
        .map(|&(x, y)| error_at(p, f, x, y, mode, seed))
        .collect();
    let worst = per_input
        .iter()
        .fold(None::<&InputError>, |best, e| match best {
            Some(b) if b.error >= e.error => Some(b),
            _ => Some(e),
        });
    let (comm_alice_bits, comm_bob_bits) = p.bits();
    Ok(ErrorReport {
        max_error: worst.map_or(0.0, |e| e.error),
        worst_input: worst.map(|e| (e.x, e.y)),
        slack,
        mode,
        comm_alice_bits,
        comm_bob_bits,
        per_input,
    })
}

/// All promised inputs of `f`.
pub fn promised_inputs(f: &dyn RelationSpec) -> Result<Vec<(u128, u128)>> {
    let (nx, ny) = (f.alice_inputs(), f.bob_inputs());
    if nx.checked_mul(ny).map_or(true, |n| n > MAX_ENUMERATED_INPUTS) {
        return Err(Error::NotEnumerable(format!(
            "{nx}×{ny} inputs exceed {MAX_ENUMERATED_INPUTS}"
        )));
    }
    Ok((0..nx)
        .flat_map(|x| (0..ny).map(move |y| (x, y)))
        .filter(|&(x, y)| f.promised(x, y))
        .collect())
}

/// Worst-case error over every promised input.
pub fn measure_error(p: &Protocol, f: &dyn RelationSpec, mode: ErrorMode, seed: u64) -> Result<ErrorReport> {
    check_shapes(p, f)?;
    measure_error_on(p, f, &promised_inputs(f)?, mode, seed)
}

/// `count` promised inputs drawn by `f.sample_promised`.
pub fn sample_inputs(f: &dyn RelationSpec, count: usize, seed: u64) -> Result<Vec<(u128, u128)>> {
    let mut stream = SharedKey::new(seed, domain::INPUTS).stream(0);
    (0..count)
        .map(|_| {
            f.sample_promised(&mut stream)
                .ok_or_else(|| param(format!("could not sample a promised input of {}", f.name())))
        })
        .collect()
}

pub(crate) fn low_bits(m: u64, width: u32) -> u64 {
    if width >= 64 {
        m
    } else {
        m & ((1u64 << width) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Alice sends her input, Referee echoes it.
    struct Echo;

    impl SmpProtocol for Echo {
        fn name(&self) -> String {
            "echo".into()
        }
        fn model(&self) -> RandomnessModel {
            RandomnessModel::Priv
        }
        fn alice_inputs(&self) -> u128 {
            8
        }
        fn bob_inputs(&self) -> u128 {
            1
        }
        fn outputs(&self) -> usize {
            8
        }
        fn coins(&self) -> CoinSpace {
            CoinSpace::NONE
        }
        fn alice_width(&self) -> u32 {
            3
        }
        fn bob_width(&self) -> u32 {
            0
        }
        fn alice_message(&self, x: u128, _: PlayerView) -> u64 {
            x as u64
        }
        fn bob_message(&self, _: u128, _: PlayerView) -> u64 {
            0
        }
        fn referee(&self, a: u64, _: u64, _: RefereeView) -> usize {
            a as usize
        }
    }

    struct EchoRelation;

    impl RelationSpec for EchoRelation {
        fn name(&self) -> String {
            "echo".into()
        }
        fn alice_inputs(&self) -> u128 {
            8
        }
        fn bob_inputs(&self) -> u128 {
            1
        }
        fn outputs(&self) -> usize {
            8
        }
        fn holds(&self, x: u128, _: u128, z: usize) -> bool {
            x as usize == z
        }
    }

    #[test]
    fn echo_run() {
        let p = Protocol::smp(Echo);
        let out = run(&p, 5, 0, 1).unwrap();
        assert_eq!((out.z, out.bits_alice, out.bits_bob), (5, 3, 0));
        assert!(matches!(run(&p, 8, 0, 1), Err(Error::InputOutOfRange(_))));
        let report = measure_error(&p, &EchoRelation, ErrorMode::Exhaustive, 0).unwrap();
        assert_eq!(report.max_error, 0.0);
        assert_eq!(report.per_input.len(), 8);
    }

    #[test]
    fn views_follow_model() {
        let c = Coins {
            alice: 1,
            bob: 2,
            public: 3,
            referee: 4,
        };
        let v = RandomnessModel::Priv.referee_view(&c);
        assert_eq!((v.alice, v.bob, v.public, v.own), (None, None, 3, 4));
        let v = RandomnessModel::TildePriv.referee_view(&c);
        assert_eq!((v.alice, v.bob), (Some(1), Some(2)));
        assert_eq!(RandomnessModel::Pub.alice_view(&c), PlayerView { own: 1, public: 3 });
        assert_eq!(RandomnessModel::Pub.bob_view(&c), PlayerView { own: 2, public: 3 });
    }

    #[test]
    fn atoms_cover_space() {
        let space = CoinSpace {
            alice: 2,
            bob: 3,
            public: 1,
            referee: 5,
        };
        let all: std::collections::HashSet<Coins> = (0..30).map(|i| space.atom(i)).collect();
        assert_eq!(all.len(), 30);
        assert!(all.iter().all(|c| c.alice < 2 && c.bob < 3 && c.public == 0 && c.referee < 5));
        assert!(space.validate(RandomnessModel::Priv).is_ok());
        assert!(CoinSpace::public_only(2).validate(RandomnessModel::TildePriv).is_err());
    }

    #[test]
    fn coin_sources_are_independent_streams() {
        let space = CoinSpace {
            alice: FULL_SEED,
            bob: FULL_SEED,
            public: 1,
            referee: FULL_SEED,
        };
        let key = SharedKey::new(42, 0);
        let c = sample_coins(&space, key, 0);
        assert_ne!(c.alice, c.bob);
        assert_ne!(c.alice, c.referee);
        assert_eq!(c, sample_coins(&space, key, 0));
        assert_ne!(c, sample_coins(&space, key, 1));
    }
}
