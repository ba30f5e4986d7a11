//! Compiling a `k`-fold protocol into a cheap single-instance protocol.
//!
//! The messages of a `k`-fold protocol, together with the coins the Referee
//! shares with each player, define channels `A` on `X^k` and `B` on `Y^k`.
//! Fixing all but one coordinate to filler distributions gives coordinate
//! channels `A_i`, `B_i`; a coordinate where both have small capacity is
//! chosen, and each player replaces its message by a rejection-sampling
//! simulation of `A_i(x)` (resp. `B_i(y)`) against the capacity-achieving
//! output distribution. The Referee reconstructs both transcripts, runs the
//! original Referee on them and reports coordinate `i` of its answer.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::channels::{capacity, coordinate_channel, uniform_filler, CapacityResult, Channel, DEFAULT_MAX_ITER};
use crate::error::{param, Error, Result};
use crate::probcore::{l1_distance, relative_entropy, Distribution};
use crate::rng::SharedKey;
use crate::smp::{
    measure_error, CoinSpace, ErrorMode, InputError, KFold, PlayerView, Protocol, RandomnessModel,
    RefereeView, RelationSpec, SmpProtocol, FULL_SEED, MAX_ENUMERATED_COINS,
};
use crate::substate::{plan_compression, CompressionPlan};

/// Largest product input alphabet turned into a channel.
pub const MAX_CHANNEL_INPUTS: u128 = 1 << 12;
/// Largest transcript alphabet.
pub const MAX_TRANSCRIPTS: usize = 1 << 16;

/// What the Referee sees of one player: the coins it shares with that
/// player (own and public) and the message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Transcript {
    pub own: u64,
    pub public: u64,
    pub message: u64,
}

/// A channel whose output symbols are transcripts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptChannel {
    pub channel: Channel,
    pub symbols: Vec<Transcript>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractedChannels {
    pub alice: TranscriptChannel,
    pub bob: TranscriptChannel,
}

fn transcript_channel(
    inputs: u128,
    own_coins: u128,
    public_coins: u128,
    own_visible: bool,
    message: impl Fn(u128, PlayerView) -> u64,
) -> Result<TranscriptChannel> {
    if inputs > MAX_CHANNEL_INPUTS {
        return Err(Error::NotEnumerable(format!(
            "{inputs} inputs exceed {MAX_CHANNEL_INPUTS}"
        )));
    }
    let atoms = own_coins
        .checked_mul(public_coins)
        .filter(|a| *a <= MAX_ENUMERATED_COINS)
        .ok_or_else(|| Error::NotEnumerable("player coin space too large".into()))?;
    let weight = 1.0 / atoms as f64;
    let mut rows: Vec<BTreeMap<Transcript, f64>> = Vec::with_capacity(inputs as usize);
    let mut symbols = BTreeMap::new();
    for x in 0..inputs {
        let mut row = BTreeMap::new();
        for public in 0..public_coins as u64 {
            for own in 0..own_coins as u64 {
                let m = message(x, PlayerView { own, public });
                let t = Transcript {
                    own: if own_visible { own } else { 0 },
                    public,
                    message: m,
                };
                *row.entry(t).or_insert(0.0) += weight;
                symbols.insert(t, ());
                if symbols.len() > MAX_TRANSCRIPTS {
                    return Err(Error::NotEnumerable("too many distinct transcripts".into()));
                }
            }
        }
        rows.push(row);
    }
    let symbols: Vec<Transcript> = symbols.into_keys().collect();
    let index: BTreeMap<Transcript, usize> = symbols.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let matrix = rows
        .into_iter()
        .map(|row| {
            let mut dense = vec![0.0; symbols.len()];
            for (t, p) in row {
                dense[index[&t]] = p;
            }
            dense
        })
        .collect();
    Ok(TranscriptChannel {
        channel: Channel::from_matrix(matrix)?,
        symbols,
    })
}

/// Exact transcript distributions of each player, by enumerating coins.
pub fn extract_channels(p: &dyn SmpProtocol) -> Result<ExtractedChannels> {
    let coins = p.coins();
    coins.validate(p.model())?;
    let visible = p.model() != RandomnessModel::Priv;
    Ok(ExtractedChannels {
        alice: transcript_channel(p.alice_inputs(), coins.alice, coins.public, visible, |x, v| {
            p.alice_message(x, v)
        })?,
        bob: transcript_channel(p.bob_inputs(), coins.bob, coins.public, visible, |y, v| {
            p.bob_message(y, v)
        })?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoordinateSelection {
    /// 0-based.
    pub coordinate: usize,
    pub alice: Vec<CapacityResult>,
    pub bob: Vec<CapacityResult>,
}

impl CoordinateSelection {
    pub fn alice_capacities(&self) -> Vec<f64> {
        self.alice.iter().map(|c| c.capacity).collect()
    }

    pub fn bob_capacities(&self) -> Vec<f64> {
        self.bob.iter().map(|c| c.capacity).collect()
    }
}

/// Capacities of every coordinate channel of `a` and `b`; picks the
/// smallest index minimizing `max(C(A_j), C(B_j))`, counting values within
/// `tol` of the minimum as ties.
#[allow(clippy::too_many_arguments)]
pub fn select_coordinate(
    a: &Channel,
    b: &Channel,
    alice_radices: &[usize],
    bob_radices: &[usize],
    alice_filler: &[Distribution],
    bob_filler: &[Distribution],
    tol: f64,
    max_iter: usize,
) -> Result<CoordinateSelection> {
    if alice_radices.len() != bob_radices.len() {
        return Err(Error::SizeMismatch(alice_radices.len(), bob_radices.len()));
    }
    let k = alice_radices.len();
    let side = |w: &Channel, radices: &[usize], filler: &[Distribution]| {
        (0..k)
            .map(|i| capacity(&coordinate_channel(w, radices, i, filler)?, tol, max_iter))
            .collect::<Result<Vec<_>>>()
    };
    let alice = side(a, alice_radices, alice_filler)?;
    let bob = side(b, bob_radices, bob_filler)?;
    let scores: Vec<f64> = alice
        .iter()
        .zip(&bob)
        .map(|(ca, cb)| ca.capacity.max(cb.capacity))
        .collect();
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let coordinate = scores
        .iter()
        .position(|s| *s <= best + tol)
        .ok_or_else(|| param("no coordinate to select"))?;
    Ok(CoordinateSelection { coordinate, alice, bob })
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    /// Per-side ℓ1 budget for the compressed messages, in `(0, 1/4)`.
    pub delta: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Per-coordinate filler on Alice's inputs; uniform when `None`.
    pub alice_filler: Option<Vec<Distribution>>,
    pub bob_filler: Option<Vec<Distribution>>,
}

impl CompileOptions {
    pub fn new(delta: f64) -> Self {
        CompileOptions {
            delta,
            tol: 1e-7,
            max_iter: DEFAULT_MAX_ITER,
            alice_filler: None,
            bob_filler: None,
        }
    }
}

/// One player's half of a compiled protocol.
#[derive(Clone, Debug, Serialize)]
pub struct CompiledSide {
    /// The coordinate channel `A_i` (or `B_i`) on single-instance inputs.
    pub channel: TranscriptChannel,
    pub capacity: CapacityResult,
    /// `C(A_j)` for every coordinate `j`.
    pub coordinate_capacities: Vec<f64>,
    /// `4·c/k` for the `k`-fold message width `c`.
    pub markov_bound: f64,
    /// `max_x D(A_i(x) ‖ τ)`.
    pub max_divergence: f64,
    pub r: f64,
    pub max_tries: u64,
    pub width: u32,
    /// Largest ℓ1 distance between the law delivered to the Referee and
    /// the target row.
    pub delivered_l1: f64,
    #[serde(skip)]
    plan: CompressionPlan,
}

impl CompiledSide {
    pub fn tau(&self) -> &Distribution {
        &self.capacity.output
    }

    pub fn plan(&self) -> &CompressionPlan {
        &self.plan
    }
}

/// The single-instance protocol produced by [`compile`].
pub struct CompiledSmp {
    source: Arc<KFold>,
    coordinate: usize,
    alice_symbols: Vec<Transcript>,
    bob_symbols: Vec<Transcript>,
    alice_plan: CompressionPlan,
    bob_plan: CompressionPlan,
}

impl CompiledSmp {
    /// Alice's coins and Bob's coins are 64-bit seeds shared with the
    /// Referee; the sample stream is stream 0 of each seed.
    fn key(seed: u64) -> SharedKey {
        SharedKey::new(seed, 0)
    }

    /// Referee's reconstruction of both transcripts.
    pub fn reconstruct(&self, a: u64, b: u64, alice_seed: u64, bob_seed: u64) -> (Transcript, Transcript) {
        let sa = self.alice_plan.decode(Self::key(alice_seed), 0, a);
        let sb = self.bob_plan.decode(Self::key(bob_seed), 0, b);
        (self.alice_symbols[sa], self.bob_symbols[sb])
    }

    fn replay(&self, ta: Transcript, tb: Transcript, own: u64) -> usize {
        let visible = self.source.model() != RandomnessModel::Priv;
        let view = RefereeView {
            alice: visible.then_some(ta.own),
            bob: visible.then_some(tb.own),
            public: ta.public,
            own,
        };
        let z = self.source.referee(ta.message, tb.message, view);
        self.source.output_digit(z, self.coordinate)
    }
}

impl SmpProtocol for CompiledSmp {
    fn name(&self) -> String {
        format!("compiled[{}, i={}]", self.source.name(), self.coordinate)
    }
    fn model(&self) -> RandomnessModel {
        RandomnessModel::TildePriv
    }
    fn alice_inputs(&self) -> u128 {
        self.source.base().alice_inputs()
    }
    fn bob_inputs(&self) -> u128 {
        self.source.base().bob_inputs()
    }
    fn outputs(&self) -> usize {
        self.source.base().outputs()
    }
    fn coins(&self) -> CoinSpace {
        CoinSpace {
            alice: FULL_SEED,
            bob: FULL_SEED,
            public: 1,
            referee: self.source.coins().referee,
        }
    }
    fn alice_width(&self) -> u32 {
        self.alice_plan.width
    }
    fn bob_width(&self) -> u32 {
        self.bob_plan.width
    }
    fn alice_message(&self, x: u128, c: PlayerView) -> u64 {
        self.alice_plan.sampler(x as usize).encode(Self::key(c.own), 0).message
    }
    fn bob_message(&self, y: u128, c: PlayerView) -> u64 {
        self.bob_plan.sampler(y as usize).encode(Self::key(c.own), 0).message
    }
    fn referee(&self, a: u64, b: u64, c: RefereeView) -> usize {
        let (ta, tb) = self.reconstruct(a, b, c.alice.unwrap_or(0), c.bob.unwrap_or(0));
        self.replay(ta, tb, c.own)
    }
    fn promised(&self, x: u128, y: u128) -> bool {
        self.source.base().promised(x, y)
    }
}

pub struct CompiledProtocol {
    pub k: usize,
    /// 0-based.
    pub coordinate: usize,
    pub delta: f64,
    pub alice: CompiledSide,
    pub bob: CompiledSide,
    protocol: Arc<CompiledSmp>,
}

impl CompiledProtocol {
    pub fn protocol(&self) -> Protocol {
        Protocol::Smp(self.protocol.clone())
    }

    pub fn compiled(&self) -> &CompiledSmp {
        &self.protocol
    }

    /// `⌈log₂(N_A+1)⌉ + ⌈log₂(N_B+1)⌉`.
    pub fn bits(&self) -> u32 {
        self.alice.width + self.bob.width
    }

    /// Exact per-input error of the uncompressed protocol in which each
    /// player sends an exact sample of its coordinate channel.
    pub fn ideal_errors(&self, f: &dyn RelationSpec) -> Result<Vec<IdealError>> {
        let referee = self.protocol.source.coins().referee;
        if referee > MAX_ENUMERATED_COINS {
            return Err(Error::NotEnumerable("Referee coin space too large".into()));
        }
        let cp = &self.protocol;
        let rows_a = self.alice.channel.channel.rows();
        let rows_b = self.bob.channel.channel.rows();
        let mut out = Vec::new();
        for x in 0..f.alice_inputs() {
            for y in 0..f.bob_inputs() {
                if !f.promised(x, y) {
                    continue;
                }
                let mut error = 0.0;
                for (sa, pa) in rows_a[x as usize].probs().iter().enumerate().filter(|(_, p)| **p > 0.0) {
                    for (sb, pb) in rows_b[y as usize].probs().iter().enumerate().filter(|(_, p)| **p > 0.0) {
                        let wrong = (0..referee as u64)
                            .filter(|&own| {
                                let z = cp.replay(cp.alice_symbols[sa], cp.bob_symbols[sb], own);
                                !f.holds(x, y, z)
                            })
                            .count();
                        error += pa * pb * wrong as f64 / referee as f64;
                    }
                }
                out.push(IdealError { x, y, error });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdealError {
    pub x: u128,
    pub y: u128,
    pub error: f64,
}

fn filler_or_uniform(given: &Option<Vec<Distribution>>, radices: &[usize]) -> Result<Vec<Distribution>> {
    match given {
        Some(f) => Ok(f.clone()),
        None => uniform_filler(radices),
    }
}

#[allow(clippy::too_many_arguments)]
fn build_side(
    extracted: &TranscriptChannel,
    radices: &[usize],
    coordinate: usize,
    filler: &[Distribution],
    capacities: &[CapacityResult],
    kfold_width: u32,
    k: usize,
    options: &CompileOptions,
) -> Result<CompiledSide> {
    let channel = coordinate_channel(&extracted.channel, radices, coordinate, filler)?;
    let cap = capacities[coordinate].clone();
    let tau = &cap.output;
    let max_divergence = channel
        .rows()
        .iter()
        .map(|row| relative_entropy(row, tau))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if max_divergence > cap.upper_bound() + 1e-9 {
        return Err(Error::Contract(format!(
            "max_x D(A_i(x)‖τ) = {max_divergence} exceeds the capacity bound {}",
            cap.upper_bound()
        )));
    }
    let markov_bound = 4.0 * kfold_width as f64 / k as f64;
    if cap.capacity > markov_bound + options.tol {
        return Err(Error::Contract(format!(
            "selected coordinate capacity {} exceeds 4c/k = {markov_bound}",
            cap.capacity
        )));
    }
    let plan = plan_compression(channel.rows(), tau, options.delta)?;
    let delivered_l1 = plan
        .samplers()
        .iter()
        .zip(channel.rows())
        .map(|(s, row)| Ok(l1_distance(&s.delivered_distribution()?, row)?))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(CompiledSide {
        channel: TranscriptChannel {
            channel,
            symbols: extracted.symbols.clone(),
        },
        coordinate_capacities: capacities.iter().map(|c| c.capacity).collect(),
        capacity: cap,
        markov_bound,
        max_divergence,
        r: plan.r,
        max_tries: plan.max_tries,
        width: plan.width,
        delivered_l1,
        plan,
    })
}

/// Compiles a `k`-fold protocol for `f^{⊗k}` into a single-instance
/// protocol for `f` in the tilde-private model.
pub fn compile(p: Arc<KFold>, f: &dyn RelationSpec, options: &CompileOptions) -> Result<CompiledProtocol> {
    if !(options.delta > 0.0 && options.delta < 0.25) {
        return Err(param(format!("delta = {} must lie in (0, 1/4)", options.delta)));
    }
    if p.model() == RandomnessModel::Pub {
        return Err(param(
            "compilation needs private or tilde-private randomness; public coins are not allowed",
        ));
    }
    let base = p.base();
    if base.alice_inputs() != f.alice_inputs()
        || base.bob_inputs() != f.bob_inputs()
        || base.outputs() != f.outputs()
    {
        return Err(param("protocol and relation disagree on sizes"));
    }
    let k = p.k();
    let extracted = extract_channels(p.as_ref())?;
    let alice_radices = vec![base.alice_inputs() as usize; k];
    let bob_radices = vec![base.bob_inputs() as usize; k];
    let alice_filler = filler_or_uniform(&options.alice_filler, &alice_radices)?;
    let bob_filler = filler_or_uniform(&options.bob_filler, &bob_radices)?;
    let selection = select_coordinate(
        &extracted.alice.channel,
        &extracted.bob.channel,
        &alice_radices,
        &bob_radices,
        &alice_filler,
        &bob_filler,
        options.tol,
        options.max_iter,
    )?;
    let i = selection.coordinate;
    let alice = build_side(
        &extracted.alice,
        &alice_radices,
        i,
        &alice_filler,
        &selection.alice,
        p.alice_width(),
        k,
        options,
    )?;
    let bob = build_side(
        &extracted.bob,
        &bob_radices,
        i,
        &bob_filler,
        &selection.bob,
        p.bob_width(),
        k,
        options,
    )?;
    let protocol = Arc::new(CompiledSmp {
        source: p.clone(),
        coordinate: i,
        alice_symbols: extracted.alice.symbols,
        bob_symbols: extracted.bob.symbols,
        alice_plan: alice.plan.clone(),
        bob_plan: bob.plan.clone(),
    });
    Ok(CompiledProtocol {
        k,
        coordinate: i,
        delta: options.delta,
        alice,
        bob,
        protocol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub trials: u64,
    /// Worst-case error of the single-copy source protocol on `f`.
    pub epsilon_base: f64,
    /// 0 when `epsilon_base` is exact.
    pub epsilon_base_slack: f64,
    /// Largest exact error of the uncompressed intermediate protocol, when
    /// the Referee's coins are enumerable.
    pub ideal_max_error: Option<f64>,
    pub delta: f64,
    /// `ε_base + 2δ`.
    pub bound: f64,
    /// `3·√(1/T)`.
    pub slack: f64,
    pub max_error: f64,
    pub pass: bool,
    pub bits_alice: u32,
    pub bits_bob: u32,
    pub bits_compiled: u32,
    pub per_input: Vec<InputError>,
}

/// Monte-Carlo error of the compiled protocol on every promised input.
pub fn verify_compiled(cp: &CompiledProtocol, f: &dyn RelationSpec, trials: u64, seed: u64) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(param("need at least one trial"));
    }
    let base = Protocol::Smp(cp.protocol.source.base().clone());
    let base_mode = if base.coin_space().enumerable() {
        ErrorMode::Exhaustive
    } else {
        ErrorMode::MonteCarlo { trials }
    };
    let base_report = measure_error(&base, f, base_mode, seed)?;
    let ideal_max_error = match cp.ideal_errors(f) {
        Ok(v) => Some(v.iter().map(|e| e.error).fold(0.0, f64::max)),
        Err(Error::NotEnumerable(_)) => None,
        Err(e) => return Err(e),
    };
    let report = measure_error(&cp.protocol(), f, ErrorMode::MonteCarlo { trials }, seed)?;
    let bound = base_report.max_error + 2.0 * cp.delta;
    let slack = report.slack;
    Ok(VerificationReport {
        trials,
        epsilon_base: base_report.max_error,
        epsilon_base_slack: base_report.slack,
        ideal_max_error,
        delta: cp.delta,
        bound,
        slack,
        max_error: report.max_error,
        pass: report.max_error <= bound + slack + base_report.slack,
        bits_alice: report.comm_alice_bits,
        bits_bob: report.comm_bob_bits,
        bits_compiled: cp.bits(),
        per_input: report.per_input,
    })
}
