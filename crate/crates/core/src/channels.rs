//! Finite-input classical channels and their capacity.
//!
//! Capacity is computed by Blahut–Arimoto alternating optimization. Each
//! iterate `μ` carries the certified bracket
//!
//! ```text
//! I(μ) ≤ C(W) ≤ max_x D(W(·|x) ‖ μW)
//! ```
//!
//! and iteration stops once the bracket is narrower than the tolerance. The
//! output distribution `τ* = μ*W` of the final iterate is therefore a
//! reference distribution with `D(W(·|x) ‖ τ*) ≤ C + tol` for every input.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::probcore::{divergence_unchecked, Distribution};
use crate::radix::MixedRadix;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Row-stochastic matrix: row `x` is the output distribution on input `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Distribution>", into = "Vec<Distribution>")]
pub struct Channel {
    rows: Vec<Distribution>,
}

impl Channel {
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        let outputs = rows
            .first()
            .map(Distribution::len)
            .ok_or_else(|| param("channel needs at least one input"))?;
        if let Some(bad) = rows.iter().find(|r| r.len() != outputs) {
            return Err(Error::SizeMismatch(outputs, bad.len()));
        }
        Ok(Channel { rows })
    }

    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(Distribution::new)
            .collect::<Result<Vec<_>>>()?;
        Channel::new(rows)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Channel::new((0..n).map(|x| Distribution::point_mass(n, x)).collect::<Result<_>>()?)
    }

    /// Every input produces `row`.
    pub fn constant(inputs: usize, row: Distribution) -> Result<Self> {
        Channel::new(vec![row; inputs])
    }

    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(param("flip probability must lie in [0, 1]"));
        }
        Channel::from_matrix(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]])
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    /// Output distribution `Σ_x μ(x) W(·|x)`.
    pub fn output_distribution(&self, mu: &Distribution) -> Result<Distribution> {
        if mu.len() != self.inputs() {
            return Err(Error::SizeMismatch(self.inputs(), mu.len()));
        }
        Distribution::new(self.mix(mu.probs()))
    }

    fn mix(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs()];
        for (w, row) in weights.iter().zip(&self.rows) {
            if *w == 0.0 {
                continue;
            }
            for (acc, p) in out.iter_mut().zip(row.probs()) {
                *acc += w * p;
            }
        }
        out
    }

    /// `I(μ)`: mutual information between input and output under `μ`.
    pub fn information(&self, mu: &Distribution) -> Result<f64> {
        let tau = self.output_distribution(mu)?;
        Ok(mu
            .probs()
            .iter()
            .zip(&self.rows)
            .filter(|(m, _)| **m > 0.0)
            .map(|(m, row)| m * divergence_unchecked(row.probs(), tau.probs()))
            .sum())
    }
}

impl TryFrom<Vec<Distribution>> for Channel {
    type Error = Error;

    fn try_from(rows: Vec<Distribution>) -> Result<Self> {
        Channel::new(rows)
    }
}

impl From<Channel> for Vec<Distribution> {
    fn from(c: Channel) -> Self {
        c.rows
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityResult {
    /// `I(μ*)`, a certified lower bound on the capacity within `gap` of it.
    pub capacity: f64,
    pub input: Distribution,
    /// `τ* = μ* W`.
    pub output: Distribution,
    pub iterations: usize,
    /// `max_x D(W(·|x) ‖ τ*) − I(μ*)`.
    pub gap: f64,
}

impl CapacityResult {
    /// `max_x D(W(·|x) ‖ τ*)`, the certified upper bound.
    pub fn upper_bound(&self) -> f64 {
        self.capacity + self.gap
    }
}

/// Blahut–Arimoto iteration state, exposed so callers can observe the
/// bracket between steps.
pub struct BlahutArimoto<'a> {
    channel: &'a Channel,
    mu: Vec<f64>,
    tau: Vec<f64>,
    divergences: Vec<f64>,
    iterations: usize,
}

impl<'a> BlahutArimoto<'a> {
    /// Starts from the uniform input distribution.
    pub fn new(channel: &'a Channel) -> Self {
        let n = channel.inputs();
        let mut state = BlahutArimoto {
            channel,
            mu: vec![1.0 / n as f64; n],
            tau: Vec::new(),
            divergences: Vec::new(),
            iterations: 0,
        };
        state.refresh();
        state
    }

    fn refresh(&mut self) {
        self.tau = self.channel.mix(&self.mu);
        self.divergences = self
            .channel
            .rows
            .iter()
            .map(|row| divergence_unchecked(row.probs(), &self.tau))
            .collect();
    }

    /// `I(μ)` at the current iterate.
    pub fn lower_bound(&self) -> f64 {
        self.mu
            .iter()
            .zip(&self.divergences)
            .filter(|(m, _)| **m > 0.0)
            .map(|(m, d)| m * d)
            .sum()
    }

    /// `max_x D(W(·|x) ‖ μW)` at the current iterate.
    pub fn upper_bound(&self) -> f64 {
        self.divergences.iter().copied().fold(0.0, f64::max)
    }

    pub fn gap(&self) -> f64 {
        (self.upper_bound() - self.lower_bound()).max(0.0)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `μ(x) ← μ(x) 2^{D(W(·|x) ‖ μW)} / Z`.
    pub fn step(&mut self) {
        let top = self.upper_bound();
        for (m, d) in self.mu.iter_mut().zip(&self.divergences) {
            *m *= (d - top).exp2();
        }
        let z: f64 = self.mu.iter().sum();
        for m in self.mu.iter_mut() {
            *m /= z;
        }
        self.iterations += 1;
        self.refresh();
    }

    pub fn result(&self) -> Result<CapacityResult> {
        Ok(CapacityResult {
            capacity: self.lower_bound(),
            input: Distribution::new(self.mu.clone())?,
            output: Distribution::new(self.tau.clone())?,
            iterations: self.iterations,
            gap: self.gap(),
        })
    }
}

/// Capacity with certified gap `≤ tol`, or [`Error::NonConvergence`]
/// carrying the last gap.
pub fn capacity(w: &Channel, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(param("capacity tolerance must be positive"));
    }
    let mut ba = BlahutArimoto::new(w);
    while ba.gap() > tol {
        if ba.iterations() >= max_iter {
            return Err(Error::NonConvergence {
                iterations: ba.iterations(),
                gap: ba.gap(),
            });
        }
        ba.step();
    }
    ba.result()
}

/// `max_x D(W(·|x) ‖ τ)`; infinite when some row escapes `supp(τ)`.
pub fn redundancy(w: &Channel, tau: &Distribution) -> Result<f64> {
    if tau.len() != w.outputs() {
        return Err(Error::SizeMismatch(w.outputs(), tau.len()));
    }
    Ok(w.rows
        .iter()
        .map(|row| divergence_unchecked(row.probs(), tau.probs()))
        .fold(0.0, f64::max))
}

/// Channel on `X` obtained from `E` on `X × Y` by averaging `y ← μ_x`.
///
/// Input `(x, y)` of `e` is row `x · ny + y`.
pub fn derived_channel(e: &Channel, shape: (usize, usize), family: &[Distribution]) -> Result<Channel> {
    let (nx, ny) = shape;
    check_shape(e, &[nx, ny])?;
    if family.len() != nx {
        return Err(Error::SizeMismatch(nx, family.len()));
    }
    let rows = family
        .iter()
        .enumerate()
        .map(|(x, mu)| {
            if mu.len() != ny {
                return Err(Error::SizeMismatch(ny, mu.len()));
            }
            let block = Channel {
                rows: e.rows[x * ny..(x + 1) * ny].to_vec(),
            };
            block.output_distribution(mu)
        })
        .collect::<Result<Vec<_>>>()?;
    Channel::new(rows)
}

fn check_shape(e: &Channel, radices: &[usize]) -> Result<()> {
    let size = radices
        .iter()
        .try_fold(1usize, |acc, r| acc.checked_mul(*r))
        .ok_or_else(|| param("input factorization overflows"))?;
    if radices.is_empty() || radices.contains(&0) || size != e.inputs() {
        return Err(param(format!(
            "input alphabet of size {} does not factor as {radices:?}",
            e.inputs()
        )));
    }
    Ok(())
}

/// The constructive super-additivity witness for `E` on `X × Y`.
#[derive(Clone, Debug, Serialize)]
pub struct ChainDecomposition {
    pub total: CapacityResult,
    /// Capacity of `E^x = E(x, ·)` for every `x`.
    pub inner: Vec<CapacityResult>,
    /// Capacity of `E^X(x) = E_{y←μ_x} E(x, y)`.
    pub outer: CapacityResult,
    /// `μ(x, y) = μ_X(x) μ_x(y)`.
    pub composed_input: Distribution,
    /// `I(E_μ)` for the composed input.
    pub composed_information: f64,
}

impl ChainDecomposition {
    /// `C(E^X) + E_{x←μ_X} C(E^x)`.
    pub fn decomposed_value(&self) -> f64 {
        self.outer.capacity
            + self
                .outer
                .input
                .probs()
                .iter()
                .zip(&self.inner)
                .map(|(p, c)| p * c.capacity)
                .sum::<f64>()
    }

    /// `C(E) − decomposed_value()`; `≥ −tol` certifies super-additivity.
    pub fn slack(&self) -> f64 {
        self.total.capacity - self.decomposed_value()
    }

    /// `|I(E_μ) − decomposed_value()|`, zero by the chain rule.
    pub fn chain_rule_residual(&self) -> f64 {
        (self.composed_information - self.decomposed_value()).abs()
    }
}

pub fn chain_decomposition(
    e: &Channel,
    shape: (usize, usize),
    tol: f64,
    max_iter: usize,
) -> Result<ChainDecomposition> {
    let (nx, ny) = shape;
    check_shape(e, &[nx, ny])?;
    let total = capacity(e, tol, max_iter)?;
    let inner = (0..nx)
        .map(|x| {
            let slice = Channel {
                rows: e.rows[x * ny..(x + 1) * ny].to_vec(),
            };
            capacity(&slice, tol, max_iter)
        })
        .collect::<Result<Vec<_>>>()?;
    let family: Vec<Distribution> = inner.iter().map(|c| c.input.clone()).collect();
    let outer_channel = derived_channel(e, shape, &family)?;
    let outer = capacity(&outer_channel, tol, max_iter)?;
    let composed: Vec<f64> = outer
        .input
        .probs()
        .iter()
        .zip(&family)
        .flat_map(|(px, mu)| mu.probs().iter().map(move |py| px * py))
        .collect();
    let composed_input = Distribution::new(composed)?;
    let composed_information = e.information(&composed_input)?;
    Ok(ChainDecomposition {
        total,
        inner,
        outer,
        composed_input,
        composed_information,
    })
}

/// Product filler with the uniform distribution on every coordinate.
pub fn uniform_filler(radices: &[usize]) -> Result<Vec<Distribution>> {
    radices.iter().map(|r| Distribution::uniform(*r)).collect()
}

/// Derived channel on coordinate `i` of a `k`-fold product input: every
/// other coordinate `j` is drawn independently from `filler[j]`
/// (`filler[i]` is ignored).
pub fn coordinate_channel(
    a: &Channel,
    radices: &[usize],
    i: usize,
    filler: &[Distribution],
) -> Result<Channel> {
    check_shape(a, radices)?;
    if i >= radices.len() {
        return Err(param(format!("coordinate {i} out of range for arity {}", radices.len())));
    }
    if filler.len() != radices.len() {
        return Err(Error::SizeMismatch(radices.len(), filler.len()));
    }
    for (j, (f, r)) in filler.iter().zip(radices).enumerate() {
        if j != i && f.len() != *r {
            return Err(Error::SizeMismatch(*r, f.len()));
        }
    }
    let radix = MixedRadix::new(radices.iter().map(|r| *r as u128).collect())?;
    let mut acc = vec![vec![0.0; a.outputs()]; radices[i]];
    for (index, row) in a.rows.iter().enumerate() {
        let digits = radix.decode(index as u128);
        let weight: f64 = digits
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, d)| filler[j].prob(*d as usize))
            .product();
        if weight == 0.0 {
            continue;
        }
        let target = &mut acc[digits[i] as usize];
        for (t, p) in target.iter_mut().zip(row.probs()) {
            *t += weight * p;
        }
    }
    Channel::from_matrix(acc)
}

/// Capacities of every coordinate channel under a fixed filler.
pub fn coordinate_capacities(
    a: &Channel,
    radices: &[usize],
    filler: &[Distribution],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<CapacityResult>> {
    (0..radices.len())
        .map(|i| capacity(&coordinate_channel(a, radices, i, filler)?, tol, max_iter))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::binary_entropy;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn capacity_closed_forms() {
        let id = capacity(&Channel::identity(2).unwrap(), 1e-9, 1000).unwrap();
        assert!((id.capacity - 1.0).abs() < 1e-9);
        let c = Channel::constant(3, d(&[0.2, 0.8])).unwrap();
        assert!(capacity(&c, 1e-9, 1000).unwrap().capacity.abs() < 1e-9);
        let bsc = capacity(&Channel::binary_symmetric(0.1).unwrap(), 1e-9, 1000).unwrap();
        assert!((bsc.capacity - (1.0 - binary_entropy(0.1))).abs() < 1e-9);
        assert!((bsc.capacity - 0.531_004_406_410_718_5).abs() < 1e-9);
    }

    #[test]
    fn capacity_rejects_bad_tolerance() {
        let id = Channel::identity(2).unwrap();
        assert!(capacity(&id, 0.0, 10).is_err());
        assert!(capacity(&id, f64::NAN, 10).is_err());
    }

    #[test]
    fn non_convergence_reports_gap() {
        let w = Channel::from_matrix(vec![
            vec![0.9, 0.1, 0.0],
            vec![0.0, 0.2, 0.8],
            vec![0.3, 0.3, 0.4],
        ])
        .unwrap();
        match capacity(&w, 1e-12, 1) {
            Err(Error::NonConvergence { iterations, gap }) => {
                assert_eq!(iterations, 1);
                assert!(gap > 1e-12 && gap.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn redundancy_examples() {
        let id = Channel::identity(2).unwrap();
        assert!((redundancy(&id, &d(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-12);
        let row = d(&[0.3, 0.7]);
        let c = Channel::constant(4, row.clone()).unwrap();
        assert_eq!(redundancy(&c, &row).unwrap(), 0.0);
        assert_eq!(redundancy(&id, &d(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        assert!(redundancy(&id, &d(&[1.0])).is_err());
    }

    fn two_by_two_input() -> Channel {
        Channel::from_matrix(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn derived_channel_examples() {
        let e = two_by_two_input();
        let point = vec![d(&[0.0, 1.0]), d(&[0.0, 1.0])];
        let f = derived_channel(&e, (2, 2), &point).unwrap();
        assert_eq!(f.row(0), e.row(1));
        assert_eq!(f.row(1), e.row(3));

        let uniform = vec![d(&[0.5, 0.5]), d(&[0.5, 0.5])];
        let f = derived_channel(&e, (2, 2), &uniform).unwrap();
        assert_eq!(f.row(0).probs(), &[0.5, 0.5, 0.0]);
        assert_eq!(f.row(1).probs(), &[0.25, 0.25, 0.5]);

        // Independent of y: rows coincide with the x-marginal rows.
        let flat = Channel::from_matrix(vec![
            vec![0.1, 0.9],
            vec![0.1, 0.9],
            vec![0.6, 0.4],
            vec![0.6, 0.4],
        ])
        .unwrap();
        let f = derived_channel(&flat, (2, 2), &[d(&[0.3, 0.7]), d(&[1.0, 0.0])]).unwrap();
        assert!((f.row(0).prob(0) - 0.1).abs() < 1e-15);
        assert!((f.row(1).prob(0) - 0.6).abs() < 1e-15);

        assert!(derived_channel(&e, (2, 2), &uniform[..1]).is_err());
        assert!(derived_channel(&e, (3, 2), &uniform).is_err());
    }

    #[test]
    fn chain_decomposition_noiseless_first_coordinate() {
        // E(x, y) = x.
        let e = Channel::from_matrix(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let dec = chain_decomposition(&e, (2, 2), 1e-9, 1000).unwrap();
        assert!((dec.total.capacity - 1.0).abs() < 1e-9);
        assert!((dec.outer.capacity - 1.0).abs() < 1e-9);
        assert!(dec.inner.iter().all(|c| c.capacity.abs() < 1e-9));
        assert!(dec.slack() > -1e-9);
        assert!(dec.chain_rule_residual() < 1e-12);
    }

    #[test]
    fn chain_decomposition_saturates_on_identity() {
        let e = Channel::identity(6).unwrap();
        let dec = chain_decomposition(&e, (2, 3), 1e-9, 1000).unwrap();
        let expected = 1.0 + 3f64.log2();
        assert!((dec.total.capacity - expected).abs() < 1e-9);
        assert!((dec.decomposed_value() - expected).abs() < 1e-9);
    }

    #[test]
    fn coordinate_channel_k1_is_identity_map() {
        let w = Channel::binary_symmetric(0.2).unwrap();
        let filler = uniform_filler(&[2]).unwrap();
        assert_eq!(coordinate_channel(&w, &[2], 0, &filler).unwrap(), w);
    }

    #[test]
    fn coordinate_channel_ignored_coordinate_has_zero_capacity() {
        // Output is the first coordinate of a pair of bits.
        let a = Channel::from_matrix(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let filler = uniform_filler(&[2, 2]).unwrap();
        let second = coordinate_channel(&a, &[2, 2], 1, &filler).unwrap();
        assert_eq!(second.row(0), second.row(1));
        let caps = coordinate_capacities(&a, &[2, 2], &filler, 1e-9, 1000).unwrap();
        assert!((caps[0].capacity - 1.0).abs() < 1e-9);
        assert!(caps[1].capacity.abs() < 1e-9);
        assert!(coordinate_channel(&a, &[2, 2], 2, &filler).is_err());
        assert!(coordinate_channel(&a, &[3, 2], 0, &filler).is_err());
    }
}
