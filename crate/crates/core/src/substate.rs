//! Classical substate decomposition and one-shot simulation of `P` from
//! shared samples of `Q`.
//!
//! With `k = D(P‖Q) + 1` and `r > 1`, every `P` with finite divergence
//! splits its reference as
//!
//! ```text
//! Q = α P̃ + (1 − α) R,    α = (r − 1) / (r · 2^{rk})
//! ```
//!
//! where `P̃` is `P` conditioned off the bad set `{x : P(x) > 2^{rk} Q(x)}`,
//! so `‖P − P̃‖₁ ≤ 2/r`. Alice, sharing an i.i.d. stream `X₁, X₂, … ~ Q` with
//! the Referee, flags each `X_t` independently with probability
//! `α P̃(X_t)/Q(X_t)` and transmits the index of the first flag. The flagged
//! sample is distributed exactly as `P̃`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::probcore::{l1_distance, relative_entropy, Distribution};
use crate::rng::{domain, SharedKey};

/// Largest number of shared samples a protocol may index.
pub const MAX_TRIES: u64 = 1 << 40;

/// Mixture-identity residual tolerated before a decomposition is rejected.
const MIXTURE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubstateDecomposition {
    pub source: Distribution,
    pub reference: Distribution,
    pub r: f64,
    /// `D(P‖Q) + 1`, in bits.
    pub k: f64,
    pub bad: Vec<usize>,
    /// `P̃`.
    pub smoothed: Distribution,
    /// `R`.
    pub remainder: Distribution,
    pub alpha: f64,
}

pub fn decompose(p: &Distribution, q: &Distribution, r: f64) -> Result<SubstateDecomposition> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(param(format!("substate parameter r = {r} must exceed 1")));
    }
    let divergence = relative_entropy(p, q)?;
    if divergence.is_infinite() {
        return Err(Error::InfiniteDivergence);
    }
    let k = divergence + 1.0;
    let threshold = (r * k).exp2();
    let alpha = (r - 1.0) / (r * threshold);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(param(format!(
            "acceptance weight underflows for r·k = {}",
            r * k
        )));
    }
    let bad: Vec<usize> = (0..p.len())
        .filter(|&x| p.prob(x) > threshold * q.prob(x))
        .collect();
    let good_mass = 1.0 - p.mass(bad.iter().copied());
    if good_mass <= 0.0 {
        return Err(Error::Contract("bad set carries all of P".into()));
    }
    let smoothed_probs: Vec<f64> = (0..p.len())
        .map(|x| {
            if bad.binary_search(&x).is_ok() {
                0.0
            } else {
                p.prob(x) / good_mass
            }
        })
        .collect();
    let smoothed = Distribution::from_weights(&smoothed_probs)?;
    let remainder_probs: Vec<f64> = q
        .probs()
        .iter()
        .zip(smoothed.probs())
        .map(|(qx, px)| (qx - alpha * px) / (1.0 - alpha))
        .collect();
    if let Some((x, v)) = remainder_probs
        .iter()
        .enumerate()
        .find(|(_, v)| **v < -MIXTURE_TOL)
    {
        return Err(Error::Contract(format!(
            "α·P̃ exceeds Q at symbol {x} (remainder {v})"
        )));
    }
    let remainder = Distribution::new(remainder_probs.iter().map(|v| v.max(0.0)).collect())?;
    Ok(SubstateDecomposition {
        source: p.clone(),
        reference: q.clone(),
        r,
        k,
        bad,
        smoothed,
        remainder,
        alpha,
    })
}

impl SubstateDecomposition {
    /// `α P̃(x) / Q(x)`, or 0 outside `supp(Q)`.
    pub fn accept_probability(&self, x: usize) -> f64 {
        let qx = self.reference.prob(x);
        if qx <= 0.0 {
            return 0.0;
        }
        (self.alpha * self.smoothed.prob(x) / qx).min(1.0)
    }

    /// `P(Bad)`.
    pub fn bad_mass(&self) -> f64 {
        self.source.mass(self.bad.iter().copied())
    }

    /// `‖P − P̃‖₁`.
    pub fn smoothing_distance(&self) -> f64 {
        l1_distance(&self.source, &self.smoothed).unwrap_or(f64::INFINITY)
    }

    /// `max_x |Q(x) − α P̃(x) − (1 − α) R(x)|`.
    pub fn mixture_residual(&self) -> f64 {
        (0..self.reference.len())
            .map(|x| {
                (self.reference.prob(x)
                    - self.alpha * self.smoothed.prob(x)
                    - (1.0 - self.alpha) * self.remainder.prob(x))
                .abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max_x (α P̃(x) − Q(x))`; non-positive under pointwise domination.
    pub fn domination_excess(&self) -> f64 {
        (0..self.reference.len())
            .map(|x| self.alpha * self.smoothed.prob(x) - self.reference.prob(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Fixed-width index of `N` tries plus the fail codeword 0: `⌈log₂(N+1)⌉`.
pub fn message_width(max_tries: u64) -> u32 {
    64 - max_tries.leading_zeros()
}

/// Smallest power of two `≥ 8 · 2^{rk}`.
pub fn default_max_tries(r: f64, k: f64) -> Result<u64> {
    let target = 8.0 * (r * k).exp2();
    if !(target <= MAX_TRIES as f64) {
        return Err(param(format!(
            "default try budget 8·2^{{rk}} = {target:e} exceeds {MAX_TRIES}"
        )));
    }
    Ok((target.ceil() as u64).next_power_of_two())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimulationParams {
    pub r: f64,
    pub delta: f64,
    pub max_tries: u64,
    pub width: u32,
    pub seed: u64,
}

impl SimulationParams {
    pub fn new(r: f64, delta: f64, max_tries: u64, seed: u64) -> Result<Self> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(param(format!("substate parameter r = {r} must exceed 1")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(param(format!("delta = {delta} must lie in (0, 1)")));
        }
        if max_tries == 0 || max_tries > MAX_TRIES {
            return Err(param(format!("max tries must lie in 1..={MAX_TRIES}")));
        }
        Ok(SimulationParams {
            r,
            delta,
            max_tries,
            width: message_width(max_tries),
            seed,
        })
    }

    /// `r = 4/δ` with the default try budget for `k = D(P‖Q) + 1`.
    pub fn for_target(p: &Distribution, q: &Distribution, delta: f64, seed: u64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(param(format!("delta = {delta} must lie in (0, 1)")));
        }
        let r = 4.0 / delta;
        let d = relative_entropy(p, q)?;
        if d.is_infinite() {
            return Err(Error::InfiniteDivergence);
        }
        SimulationParams::new(r, delta, default_max_tries(r, d + 1.0)?, seed)
    }
}

/// Alice's and the Referee's halves of the rejection-sampling protocol for
/// one target distribution.
#[derive(Clone, Debug)]
pub struct RejectionSampler {
    decomposition: SubstateDecomposition,
    cdf: Vec<f64>,
    accept: Vec<f64>,
    max_tries: u64,
}

/// What Alice transmits: 0 on failure, else the 1-based index of the first
/// accepted shared sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub message: u64,
    pub tries: u64,
}

impl RejectionSampler {
    pub fn new(decomposition: SubstateDecomposition, max_tries: u64) -> Result<Self> {
        if max_tries == 0 || max_tries > MAX_TRIES {
            return Err(param(format!("max tries must lie in 1..={MAX_TRIES}")));
        }
        let accept = (0..decomposition.reference.len())
            .map(|x| decomposition.accept_probability(x))
            .collect();
        Ok(RejectionSampler {
            cdf: decomposition.reference.cdf(),
            decomposition,
            accept,
            max_tries,
        })
    }

    pub fn decomposition(&self) -> &SubstateDecomposition {
        &self.decomposition
    }

    pub fn max_tries(&self) -> u64 {
        self.max_tries
    }

    pub fn width(&self) -> u32 {
        message_width(self.max_tries)
    }

    /// `(1 − α)^N`.
    pub fn fail_probability(&self) -> f64 {
        (self.max_tries as f64 * (-self.decomposition.alpha).ln_1p()).exp()
    }

    /// Law of the Referee's output: `(1 − f) P̃ + f · δ₀`.
    pub fn delivered_distribution(&self) -> Result<Distribution> {
        let f = self.fail_probability();
        let mut probs: Vec<f64> = self
            .decomposition
            .smoothed
            .probs()
            .iter()
            .map(|p| (1.0 - f) * p)
            .collect();
        probs[0] += f;
        Distribution::new(probs)
    }

    /// Alice: scan the shared stream and flag the first acceptance.
    pub fn encode(&self, key: SharedKey, stream: u64) -> Encoded {
        let mut samples = key.with_domain(domain::SHARED_SAMPLES).stream(stream);
        let mut coins = key.with_domain(domain::ACCEPT_COINS).stream(stream);
        let reference = &self.decomposition.reference;
        for t in 1..=self.max_tries {
            let x = reference.sample_with(&self.cdf, samples.uniform());
            if coins.uniform() < self.accept[x] {
                return Encoded { message: t, tries: t };
            }
        }
        Encoded {
            message: 0,
            tries: self.max_tries,
        }
    }

    /// Referee: replay the shared stream at the transmitted index.
    pub fn decode(&self, key: SharedKey, stream: u64, message: u64) -> usize {
        decode_shared(&self.decomposition.reference, &self.cdf, key, stream, message)
    }
}

fn decode_shared(reference: &Distribution, cdf: &[f64], key: SharedKey, stream: u64, message: u64) -> usize {
    if message == 0 {
        return 0;
    }
    let mut samples = key.with_domain(domain::SHARED_SAMPLES).stream(stream);
    samples.seek(message - 1);
    reference.sample_with(cdf, samples.uniform())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulationOutcome {
    /// Alice's accepted shared sample, `None` when every try failed.
    pub sample: Option<usize>,
    /// What the Referee outputs (symbol 0 on failure).
    pub output: usize,
    pub bits_sent: u32,
    pub tries: u64,
}

fn run_trial(sampler: &RejectionSampler, seed: u64, trial: u64) -> SimulationOutcome {
    let key = SharedKey::new(seed, domain::SHARED_SAMPLES);
    let sent = sampler.encode(key, trial);
    let output = sampler.decode(key, trial, sent.message);
    SimulationOutcome {
        sample: (sent.message != 0).then_some(output),
        output,
        bits_sent: sampler.width(),
        tries: sent.tries,
    }
}

fn sampler_for(p: &Distribution, q: &Distribution, params: &SimulationParams) -> Result<RejectionSampler> {
    RejectionSampler::new(decompose(p, q, params.r)?, params.max_tries)
}

/// One run of the protocol on the stream selected by `params.seed`.
pub fn simulate_once(p: &Distribution, q: &Distribution, params: &SimulationParams) -> Result<SimulationOutcome> {
    Ok(run_trial(&sampler_for(p, q, params)?, params.seed, 0))
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub empirical: Distribution,
    pub l1_to_target: f64,
    pub l1_to_smoothed: f64,
    pub mean_bits: f64,
    pub fail_rate: f64,
    pub mean_tries: f64,
    pub alpha: f64,
    pub bad_set: Vec<usize>,
}

/// Aggregates `trials` independent runs (trial `t` uses stream `t`).
pub fn simulate_distribution(
    p: &Distribution,
    q: &Distribution,
    params: &SimulationParams,
    trials: u64,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(param("need at least one trial"));
    }
    let sampler = sampler_for(p, q, params)?;
    let d = q.len();
    let (counts, fails, tries) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let out = run_trial(&sampler, params.seed, t);
            let mut counts = vec![0u64; d];
            counts[out.output] += 1;
            (counts, u64::from(out.sample.is_none()), out.tries)
        })
        .reduce(
            || (vec![0u64; d], 0, 0),
            |(mut a, fa, ta), (b, fb, tb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                (a, fa + fb, ta + tb)
            },
        );
    let empirical =
        Distribution::new(counts.iter().map(|c| *c as f64 / trials as f64).collect())?;
    let dec = sampler.decomposition();
    Ok(SimulationReport {
        trials,
        l1_to_target: l1_distance(&empirical, p)?,
        l1_to_smoothed: l1_distance(&empirical, &dec.smoothed)?,
        empirical,
        mean_bits: sampler.width() as f64,
        fail_rate: fails as f64 / trials as f64,
        mean_tries: tries as f64 / trials as f64,
        alpha: dec.alpha,
        bad_set: dec.bad.clone(),
    })
}

/// Shared compression parameters for a family of targets against one
/// reference, sized so that every delivered law is within `δ` in ℓ1 of
/// its target.
#[derive(Clone, Debug)]
pub struct CompressionPlan {
    pub r: f64,
    pub max_tries: u64,
    pub width: u32,
    /// Largest `‖P_x − P̃_x‖₁` over the family.
    pub worst_smoothing: f64,
    /// Largest `(1 − α_x)^N` over the family.
    pub worst_fail: f64,
    reference: Distribution,
    reference_cdf: Vec<f64>,
    samplers: Vec<RejectionSampler>,
}

impl CompressionPlan {
    pub fn sampler(&self, row: usize) -> &RejectionSampler {
        &self.samplers[row]
    }

    pub fn samplers(&self) -> &[RejectionSampler] {
        &self.samplers
    }

    pub fn reference(&self) -> &Distribution {
        &self.reference
    }

    pub fn decode(&self, key: SharedKey, stream: u64, message: u64) -> usize {
        decode_shared(&self.reference, &self.reference_cdf, key, stream, message)
    }
}

const PLAN_GRID: usize = 400;

/// Chooses `r ∈ (1, 4/δ]` and the smallest `N` such that, for every row,
/// `‖P_x − P̃_x‖₁ ≤ δ/2` and `(1 − α_x)^N ≤ δ/4`, minimizing `N`.
pub fn plan_compression(rows: &[Distribution], reference: &Distribution, delta: f64) -> Result<CompressionPlan> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param(format!("delta = {delta} must lie in (0, 1)")));
    }
    if rows.is_empty() {
        return Err(param("nothing to compress"));
    }
    let divergences = rows
        .iter()
        .map(|p| relative_entropy(p, reference))
        .collect::<Result<Vec<_>>>()?;
    if divergences.iter().any(|d| d.is_infinite()) {
        return Err(Error::InfiniteDivergence);
    }
    let k_max = divergences.iter().copied().fold(0.0, f64::max) + 1.0;
    let r_max = 4.0 / delta;
    let mut best: Option<(u64, f64, Vec<SubstateDecomposition>)> = None;
    for j in 1..=PLAN_GRID {
        let r = 1.0 + (r_max - 1.0) * (j as f64 / PLAN_GRID as f64).powi(2);
        if r * k_max > (MAX_TRIES as f64).log2() {
            break;
        }
        let decs = rows
            .iter()
            .map(|p| decompose(p, reference, r))
            .collect::<Result<Vec<_>>>()?;
        if decs.iter().any(|d| d.smoothing_distance() > delta / 2.0) {
            continue;
        }
        let alpha_min = decs.iter().map(|d| d.alpha).fold(1.0, f64::min);
        let tries = ((delta / 4.0).ln() / (-alpha_min).ln_1p()).ceil().max(1.0);
        if tries > MAX_TRIES as f64 {
            continue;
        }
        let tries = tries as u64;
        if best.as_ref().map_or(true, |(n, _, _)| tries < *n) {
            best = Some((tries, r, decs));
        }
    }
    let (max_tries, r, decs) = best.ok_or_else(|| {
        param(format!(
            "no r ∈ (1, {r_max}] compresses within δ = {delta} using at most {MAX_TRIES} tries"
        ))
    })?;
    let samplers = decs
        .into_iter()
        .map(|d| RejectionSampler::new(d, max_tries))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompressionPlan {
        r,
        max_tries,
        width: message_width(max_tries),
        worst_smoothing: samplers
            .iter()
            .map(|s| s.decomposition().smoothing_distance())
            .fold(0.0, f64::max),
        worst_fail: samplers
            .iter()
            .map(RejectionSampler::fail_probability)
            .fold(0.0, f64::max),
        reference_cdf: reference.cdf(),
        reference: reference.clone(),
        samplers,
    })
}
