//! Reference protocols and relations: Equality, `h`, the partial function
//! `f`, and the relation `s`.
//!
//! Bit `k` of an input string `x` is `(x >> k) & 1`; positions are 0-based.

use crate::error::{param, Result};
use crate::rng::{domain, SharedKey, Stream};

use super::{
    low_bits, CoinSpace, OneWayProtocol, Party, PlayerView, RandomnessModel, RefereeView,
    RelationSpec, SmpProtocol, FULL_SEED,
};

/// `⌈log₂ n⌉` for `n ≥ 1`.
pub fn ceil_log2(n: u128) -> u32 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros()
    }
}

fn bit(x: u128, k: u32) -> u64 {
    ((x >> k) & 1) as u64
}

fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

/// `t` inner products `⟨x, r_s⟩ mod 2` against public strings `r_s`. The
/// strings are the bits of the coin atom when `n·t ≤ 64`, otherwise they
/// are expanded from a 64-bit seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Fingerprint {
    n: u32,
    t: u32,
}

impl Fingerprint {
    fn new(n: u32, t: u32) -> Result<Self> {
        if !(1..=64).contains(&n) {
            return Err(param(format!("fingerprinted strings need 1..=64 bits, got {n}")));
        }
        if !(1..=32).contains(&t) {
            return Err(param(format!("fingerprint repetitions must lie in 1..=32, got {t}")));
        }
        Ok(Fingerprint { n, t })
    }

    fn direct(&self) -> bool {
        self.n * self.t <= 64
    }

    fn coin_space(&self) -> u128 {
        if self.direct() {
            1u128 << (self.n * self.t)
        } else {
            FULL_SEED
        }
    }

    fn apply(&self, x: u128, atom: u64) -> u64 {
        let m = mask(self.n);
        let mut stream: Option<Stream> =
            (!self.direct()).then(|| SharedKey::new(atom, domain::FINGERPRINT).stream(0));
        (0..self.t).fold(0u64, |acc, s| {
            let r = match stream.as_mut() {
                Some(st) => st.next_u64() as u128 & m,
                None => (atom as u128 >> (s * self.n)) & m,
            };
            acc | (((x & r).count_ones() & 1) as u64) << s
        })
    }
}

/// `EQ(x, y) = [x = y]` on `n`-bit strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqualityRelation {
    pub n: u32,
}

impl EqualityRelation {
    pub fn new(n: u32) -> Result<Self> {
        if !(1..=64).contains(&n) {
            return Err(param(format!("equality needs 1..=64 bits, got {n}")));
        }
        Ok(EqualityRelation { n })
    }
}

impl RelationSpec for EqualityRelation {
    fn name(&self) -> String {
        format!("equality(n={})", self.n)
    }
    fn alice_inputs(&self) -> u128 {
        1 << self.n
    }
    fn bob_inputs(&self) -> u128 {
        1 << self.n
    }
    fn outputs(&self) -> usize {
        2
    }
    fn holds(&self, x: u128, y: u128, z: usize) -> bool {
        z == usize::from(x == y)
    }
    fn sample_promised(&self, stream: &mut Stream) -> Option<(u128, u128)> {
        let x = stream.below_wide(1 << self.n);
        // Half the samples are equal pairs, which uniform sampling would miss.
        let y = if stream.next_u64() & 1 == 0 {
            x
        } else {
            stream.below_wide(1 << self.n)
        };
        Some((x, y))
    }
}

/// Both players send their whole input; zero error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqualityFullDisclosure {
    pub n: u32,
}

impl EqualityFullDisclosure {
    pub fn new(n: u32) -> Result<Self> {
        if !(1..=32).contains(&n) {
            return Err(param(format!("full-disclosure equality needs 1..=32 bits, got {n}")));
        }
        Ok(EqualityFullDisclosure { n })
    }
}

impl SmpProtocol for EqualityFullDisclosure {
    fn name(&self) -> String {
        format!("eq_full(n={})", self.n)
    }
    fn model(&self) -> RandomnessModel {
        RandomnessModel::TildePriv
    }
    fn alice_inputs(&self) -> u128 {
        1 << self.n
    }
    fn bob_inputs(&self) -> u128 {
        1 << self.n
    }
    fn outputs(&self) -> usize {
        2
    }
    fn coins(&self) -> CoinSpace {
        CoinSpace::NONE
    }
    fn alice_width(&self) -> u32 {
        self.n
    }
    fn bob_width(&self) -> u32 {
        self.n
    }
    fn alice_message(&self, x: u128, _: PlayerView) -> u64 {
        x as u64
    }
    fn bob_message(&self, y: u128, _: PlayerView) -> u64 {
        y as u64
    }
    fn referee(&self, a: u64, b: u64, _: RefereeView) -> usize {
        usize::from(a == b)
    }
}

/// Public-coin fingerprinting: error `2^-t` on unequal inputs, 0 on equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqualityFingerprint {
    fp: Fingerprint,
}

impl EqualityFingerprint {
    pub fn new(n: u32, t: u32) -> Result<Self> {
        Ok(EqualityFingerprint {
            fp: Fingerprint::new(n, t)?,
        })
    }
}

impl SmpProtocol for EqualityFingerprint {
    fn name(&self) -> String {
        format!("eq(n={}, t={})", self.fp.n, self.fp.t)
    }
    fn model(&self) -> RandomnessModel {
        RandomnessModel::Pub
    }
    fn alice_inputs(&self) -> u128 {
        1 << self.fp.n
    }
    fn bob_inputs(&self) -> u128 {
        1 << self.fp.n
    }
    fn outputs(&self) -> usize {
        2
    }
    fn coins(&self) -> CoinSpace {
        CoinSpace::public_only(self.fp.coin_space())
    }
    fn alice_width(&self) -> u32 {
        self.fp.t
    }
    fn bob_width(&self) -> u32 {
        self.fp.t
    }
    fn alice_message(&self, x: u128, c: PlayerView) -> u64 {
        self.fp.apply(x, c.public)
    }
    fn bob_message(&self, y: u128, c: PlayerView) -> u64 {
        self.fp.apply(y, c.public)
    }
    fn referee(&self, a: u64, b: u64, _: RefereeView) -> usize {
        usize::from(a == b)
    }
}

/// Shape of `h` on `n`-bit strings: `x` is a `√n × √n` bit matrix stored
/// row by row, and `i`, `j` are row and column indices of `log(n)/2` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct HShape {
    n: u32,
    side: u32,
    half: u32,
}

impl HShape {
    fn new(n: u32) -> Result<Self> {
        if !matches!(n, 4 | 16 | 64) {
            return Err(param(format!("h needs n ∈ {{4, 16, 64}}, got {n}")));
        }
        let half = n.trailing_zeros() / 2;
        Ok(HShape {
            n,
            side: 1 << half,
            half,
        })
    }

    fn inputs(&self) -> u128 {
        (1u128 << self.n) * self.side as u128
    }

    /// `(string, index)` from a flat input.
    fn split(&self, v: u128) -> (u128, u32) {
        (v / self.side as u128, (v % self.side as u128) as u32)
    }

    fn entry(&self, x: u128, i: u32, j: u32) -> u64 {
        bit(x, i * self.side + j)
    }

    fn block(&self, x: u128, i: u32) -> u64 {
        ((x >> (i * self.side)) & mask(self.side)) as u64
    }
}

/// `h((x, i), (y, j)) = [x = y] ∧ x_{ij}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HRelation {
    shape: HShape,
    equal_promise: bool,
}

impl HRelation {
    /// With `equal_promise`, only pairs with `x = y` are promised.
    pub fn new(n: u32, equal_promise: bool) -> Result<Self> {
        Ok(HRelation {
            shape: HShape::new(n)?,
            equal_promise,
        })
    }

    pub fn value(&self, a: u128, b: u128) -> usize {
        let ((x, i), (y, j)) = (self.shape.split(a), self.shape.split(b));
        usize::from(x == y && self.shape.entry(x, i, j) == 1)
    }
}

impl RelationSpec for HRelation {
    fn name(&self) -> String {
        format!("h(n={})", self.shape.n)
    }
    fn alice_inputs(&self) -> u128 {
        self.shape.inputs()
    }
    fn bob_inputs(&self) -> u128 {
        self.shape.inputs()
    }
    fn outputs(&self) -> usize {
        2
    }
    fn holds(&self, a: u128, b: u128, z: usize) -> bool {
        z == self.value(a, b)
    }
    fn promised(&self, a: u128, b: u128) -> bool {
        !self.equal_promise || self.shape.split(a).0 == self.shape.split(b).0
    }
    fn sample_promised(&self, stream: &mut Stream) -> Option<(u128, u128)> {
        let s = &self.shape;
        let x = stream.below_wide(1 << s.n);
        let y = if self.equal_promise || stream.next_u64() & 1 == 0 {
            x
        } else {
            stream.below_wide(1 << s.n)
        };
        let i = stream.below(s.side as u128) as u128;
        let j = stream.below(s.side as u128) as u128;
        Some((x * s.side as u128 + i, y * s.side as u128 + j))
    }
}

/// Alice sends row `i` of `x` and a fingerprint of `x`; Bob sends `j` and a
/// fingerprint of `y`; the Referee outputs `x_{ij}` if the fingerprints
/// agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HSmp {
    shape: HShape,
    fp: Fingerprint,
}

impl HSmp {
    pub fn new(n: u32, t: u32) -> Result<Self> {
        Ok(HSmp {
            shape: HShape::new(n)?,
            fp: Fingerprint::new(n, t)?,
        })
    }
}

impl SmpProtocol for HSmp {
    fn name(&self) -> String {
        format!("h_smp(n={}, t={})", self.shape.n, self.fp.t)
    }
    fn model(&self) -> RandomnessModel {
        RandomnessModel::Pub
    }
    fn alice_inputs(&self) -> u128 {
        self.shape.inputs()
    }
    fn bob_inputs(&self) -> u128 {
        self.shape.inputs()
    }
    fn outputs(&self) -> usize {
        2
    }
    fn coins(&self) -> CoinSpace {
        CoinSpace::public_only(self.fp.coin_space())
    }
    fn alice_width(&self) -> u32 {
        self.shape.side + self.fp.t
    }
    fn bob_width(&self) -> u32 {
        self.shape.half + self.fp.t
    }
    fn alice_message(&self, a: u128, c: PlayerView) -> u64 {
        let (x, i) = self.shape.split(a);
        self.shape.block(x, i) << self.fp.t | self.fp.apply(x, c.public)
    }
    fn bob_message(&self, b: u128, c: PlayerView) -> u64 {
        let (y, j) = self.shape.split(b);
        (j as u64) << self.fp.t | self.fp.apply(y, c.public)
    }
    fn referee(&self, a: u64, b: u64, _: RefereeView) -> usize {
        let t = self.fp.t;
        if low_bits(a, t) != low_bits(b, t) {
            return 0;
        }
        let j = (b >> t) as u32;
        ((a >> t >> j) & 1) as usize
    }
}

/// Alice sends `i` and a fingerprint of `x`; Bob outputs `y_{ij}` if the
/// fingerprint matches his own.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HOneWay {
    shape: HShape,
    fp: Fingerprint,
}

impl HOneWay {
    pub fn new(n: u32, t: u32) -> Result<Self> {
        Ok(HOneWay {
            shape: HShape::new(n)?,
            fp: Fingerprint::new(n, t)?,
        })
    }
}

impl OneWayProtocol for HOneWay {
    fn name(&self) -> String {
        format!("h_oneway(n={}, t={})", self.shape.n, self.fp.t)
    }
    fn sender(&self) -> Party {
        Party::Alice
    }
    fn alice_inputs(&self) -> u128 {
        self.shape.inputs()
    }
    fn bob_inputs(&self) -> u128 {
        self.shape.inputs()
    }
    fn outputs(&self) -> usize {
        2
    }
    fn public_coins(&self) -> u128 {
        self.fp.coin_space()
    }
    fn width(&self) -> u32 {
        self.shape.half + self.fp.t
    }
    fn message(&self, a: u128, public: u64) -> u64 {
        let (x, i) = self.shape.split(a);
        (i as u64) << self.fp.t | self.fp.apply(x, public)
    }
    fn output(&self, b: u128, m: u64, public: u64) -> usize {
        let (y, j) = self.shape.split(b);
        if low_bits(m, self.fp.t) != self.fp.apply(y, public) {
            return 0;
        }
        let i = (m >> self.fp.t) as u32;
        self.shape.entry(y, i, j) as usize
    }
}

fn check_index_range(n: u32, max: u32, what: &str) -> Result<()> {
    if !(2..=max).contains(&n) {
        return Err(param(format!("{what} needs 2 ≤ n ≤ {max}, got {n}")));
    }
    Ok(())
}

/// Alice holds `(x, i)`, Bob holds `(y_1, …, y_n, j)` with the promise
/// `y_i = x`; the answer is `x_j`. Alice's flat input is `x·n + i`; Bob's
/// is `Y·n + j` where `y_l` occupies bits `l·n .. (l+1)·n` of `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FRelation {
    pub n: u32,
}

pub const F_MAX_N: u32 = 11;

impl FRelation {
    pub fn new(n: u32) -> Result<Self> {
        check_index_range(n, F_MAX_N, "f")?;
        Ok(FRelation { n })
    }

    fn split_alice(&self, a: u128) -> (u128, u32) {
        (a / self.n as u128, (a % self.n as u128) as u32)
    }

    fn split_bob(&self, b: u128) -> (u128, u32) {
        (b / self.n as u128, (b % self.n as u128) as u32)
    }

    fn string(&self, ys: u128, l: u32) -> u128 {
        (ys >> (l * self.n)) & mask(self.n)
    }

    fn column(&self, ys: u128, j: u32) -> u64 {
        (0..self.n).fold(0u64, |acc, l| acc | bit(self.string(ys, l), j) << l)
    }
}

impl RelationSpec for FRelation {
    fn name(&self) -> String {
        format!("f(n={})", self.n)
    }
    fn alice_inputs(&self) -> u128 {
        (1u128 << self.n) * self.n as u128
    }
    fn bob_inputs(&self) -> u128 {
        (1u128 << (self.n * self.n)) * self.n as u128
    }
    fn outputs(&self) -> usize {
        2
    }
    fn holds(&self, a: u128, b: u128, z: usize) -> bool {
        let (x, _) = self.split_alice(a);
        let (_, j) = self.split_bob(b);
        z as u64 == bit(x, j)
    }
    fn promised(&self, a: u128, b: u128) -> bool {
        let (x, i) = self.split_alice(a);
        let (ys, _) = self.split_bob(b);
        self.string(ys, i) == x
    }
    fn sample_promised(&self, stream: &mut Stream) -> Option<(u128, u128)> {
        let n = self.n;
        let x = stream.below_wide(1 << n);
        let i = stream.below(n as u128) as u32;
        let j = stream.below(n as u128) as u128;
        let ys = stream.below_wide(1 << (n * n));
        let ys = ys & !(mask(n) << (i * n)) | x << (i * n);
        Some((x * n as u128 + i as u128, ys * n as u128 + j))
    }
}

/// The two one-way protocols for `f`: the sender transmits only its index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FOneWay {
    rel: FRelation,
    sender: Party,
}

impl FOneWay {
    pub fn new(n: u32, sender: Party) -> Result<Self> {
        Ok(FOneWay {
            rel: FRelation::new(n)?,
            sender,
        })
    }
}

impl OneWayProtocol for FOneWay {
    fn name(&self) -> String {
        let dir = match self.sender {
            Party::Alice => "ab",
            Party::Bob => "ba",
        };
        format!("f_oneway_{dir}(n={})", self.rel.n)
    }
    fn sender(&self) -> Party {
        self.sender
    }
    fn alice_inputs(&self) -> u128 {
        self.rel.alice_inputs()
    }
    fn bob_inputs(&self) -> u128 {
        self.rel.bob_inputs()
    }
    fn outputs(&self) -> usize {
        2
    }
    fn width(&self) -> u32 {
        ceil_log2(self.rel.n as u128)
    }
    fn message(&self, input: u128, _: u64) -> u64 {
        // Alice's index is i, Bob's is j; both sit in the low position.
        (input % self.rel.n as u128) as u64
    }
    fn output(&self, input: u128, m: u64, _: u64) -> usize {
        match self.sender {
            Party::Alice => {
                let (ys, j) = self.rel.split_bob(input);
                bit(self.rel.string(ys, m as u32), j) as usize
            }
            Party::Bob => {
                let (x, _) = self.rel.split_alice(input);
                bit(x, m as u32) as usize
            }
        }
    }
    fn promised(&self, a: u128, b: u128) -> bool {
        self.rel.promised(a, b)
    }
}

/// The two deterministic SMP protocols for `f`: the heavy player sends `n`
/// bits, the other only its index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FSmp {
    rel: FRelation,
    heavy: Party,
}

impl FSmp {
    pub fn new(n: u32, heavy: Party) -> Result<Self> {
        Ok(FSmp {
            rel: FRelation::new(n)?,
            heavy,
        })
    }
}

impl SmpProtocol for FSmp {
    fn name(&self) -> String {
        let side = match self.heavy {
            Party::Alice => "a",
            Party::Bob => "b",
        };
        format!("f_smp_{side}_heavy(n={})", self.rel.n)
    }
    fn model(&self) -> RandomnessModel {
        RandomnessModel::Priv
    }
    fn alice_inputs(&self) -> u128 {
        self.rel.alice_inputs()
    }
    fn bob_inputs(&self) -> u128 {
        self.rel.bob_inputs()
    }
    fn outputs(&self) -> usize {
        2
    }
    fn coins(&self) -> CoinSpace {
        CoinSpace::NONE
    }
    fn alice_width(&self) -> u32 {
        match self.heavy {
            Party::Alice => self.rel.n,
            Party::Bob => ceil_log2(self.rel.n as u128),
        }
    }
    fn bob_width(&self) -> u32 {
        match self.heavy {
            Party::Alice => ceil_log2(self.rel.n as u128),
            Party::Bob => self.rel.n,
        }
    }
    fn alice_message(&self, a: u128, _: PlayerView) -> u64 {
        let (x, i) = self.rel.split_alice(a);
        match self.heavy {
            Party::Alice => x as u64,
            Party::Bob => i as u64,
        }
    }
    fn bob_message(&self, b: u128, _: PlayerView) -> u64 {
        let (ys, j) = self.rel.split_bob(b);
        match self.heavy {
            Party::Alice => j as u64,
            Party::Bob => self.rel.column(ys, j),
        }
    }
    fn referee(&self, a: u64, b: u64, _: RefereeView) -> usize {
        match self.heavy {
            Party::Alice => (a >> b) as usize & 1,
            Party::Bob => (b >> a) as usize & 1,
        }
    }
    fn promised(&self, a: u128, b: u128) -> bool {
        self.rel.promised(a, b)
    }
}

/// `s((x, i), (y, j))` accepts `x_j` or `y_i`, tagged with which one was
/// given. Output `z = 2·tag + bit` with tag 0 for `x_j` and 1 for `y_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SRelation {
    pub n: u32,
}

impl SRelation {
    pub fn new(n: u32) -> Result<Self> {
        check_index_range(n, 64, "s")?;
        Ok(SRelation { n })
    }

    fn split(&self, v: u128) -> (u128, u32) {
        (v / self.n as u128, (v % self.n as u128) as u32)
    }
}

impl RelationSpec for SRelation {
    fn name(&self) -> String {
        format!("s(n={})", self.n)
    }
    fn alice_inputs(&self) -> u128 {
        (1u128 << self.n) * self.n as u128
    }
    fn bob_inputs(&self) -> u128 {
        (1u128 << self.n) * self.n as u128
    }
    fn outputs(&self) -> usize {
        4
    }
    fn holds(&self, a: u128, b: u128, z: usize) -> bool {
        let ((x, i), (y, j)) = (self.split(a), self.split(b));
        match z {
            0 | 1 => bit(x, j) == z as u64,
            2 | 3 => bit(y, i) == (z - 2) as u64,
            _ => false,
        }
    }
}

/// Alice sends `i`; Bob answers `y_i`, tagged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SOneWay {
    rel: SRelation,
}

impl SOneWay {
    pub fn new(n: u32) -> Result<Self> {
        Ok(SOneWay {
            rel: SRelation::new(n)?,
        })
    }
}

impl OneWayProtocol for SOneWay {
    fn name(&self) -> String {
        format!("s_oneway(n={})", self.rel.n)
    }
    fn sender(&self) -> Party {
        Party::Alice
    }
    fn alice_inputs(&self) -> u128 {
        self.rel.alice_inputs()
    }
    fn bob_inputs(&self) -> u128 {
        self.rel.bob_inputs()
    }
    fn outputs(&self) -> usize {
        4
    }
    fn width(&self) -> u32 {
        ceil_log2(self.rel.n as u128)
    }
    fn message(&self, a: u128, _: u64) -> u64 {
        self.rel.split(a).1 as u64
    }
    fn output(&self, b: u128, m: u64, _: u64) -> usize {
        let (y, _) = self.rel.split(b);
        2 + bit(y, m as u32) as usize
    }
}
