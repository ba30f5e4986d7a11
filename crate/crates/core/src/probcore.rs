//! Finite probability distributions and classical entropic quantities.
//!
//! All logarithms are base 2; every quantity is in bits. `0 · log 0 = 0`.
//! A divergence whose first argument puts mass outside the support of the
//! second is reported as `f64::INFINITY` rather than as an error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass accepted at construction.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Entries this far below zero are treated as round-off and clamped.
const NEGATIVE_SLACK: f64 = 1e-12;

/// Probability vector over the alphabet `0..len`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates `probs` (non-empty, finite, non-negative, mass 1 within
    /// [`MASS_TOLERANCE`]) and renormalizes it exactly.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let probs = validated(probs)?;
        Ok(Distribution { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Distribution {
            probs: vec![1.0 / size as f64; size],
        })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::InvalidDistribution(format!(
                "point {at} outside alphabet of size {size}"
            )));
        }
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Ok(Distribution { probs })
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be non-negative with positive finite sum".into(),
            ));
        }
        Distribution::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs.get(x).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, _)| x)
    }

    /// Mass of the given subset.
    pub fn mass<I: IntoIterator<Item = usize>>(&self, subset: I) -> f64 {
        subset.into_iter().map(|x| self.prob(x)).sum()
    }

    /// Cumulative distribution, last entry forced to exactly 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        cdf
    }

    /// Inverse-CDF sample from a uniform `u ∈ [0, 1)`.
    pub fn sample_with(&self, cdf: &[f64], u: f64) -> usize {
        let idx = cdf.partition_point(|c| *c <= u).min(self.probs.len() - 1);
        if self.probs[idx] > 0.0 {
            return idx;
        }
        // Only reachable through the forced final CDF entry.
        (0..idx).rev().find(|x| self.probs[*x] > 0.0).unwrap_or(idx)
    }

    fn check_same_len(&self, other: &Distribution) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch(self.len(), other.len()));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Distribution::new(probs)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

fn validated(mut probs: Vec<f64>) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty alphabet".into()));
    }
    for (i, p) in probs.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is not finite"
            )));
        }
        if *p < 0.0 {
            if *p < -NEGATIVE_SLACK {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} is negative ({p})"
                )));
            }
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "mass {total} differs from 1"
        )));
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(probs)
}

/// Probability matrix over `(x, m)` pairs, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDistribution("empty joint alphabet".into()));
        }
        if rows.checked_mul(cols) != Some(probs.len()) {
            return Err(Error::SizeMismatch(rows.saturating_mul(cols), probs.len()));
        }
        let probs = validated(probs)?;
        Ok(JointDistribution { rows, cols, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("ragged joint matrix".into()));
        }
        JointDistribution::new(rows.len(), cols, rows.concat())
    }

    /// Product `P(x) · Q(m)`.
    pub fn product(p: &Distribution, q: &Distribution) -> Self {
        let probs = p
            .probs()
            .iter()
            .flat_map(|a| q.probs().iter().map(move |b| a * b))
            .collect();
        JointDistribution {
            rows: p.len(),
            cols: q.len(),
            probs,
        }
    }

    /// `P(x) · W(m | x)` for a family of conditionals.
    pub fn from_conditionals(p: &Distribution, rows: &[Distribution]) -> Result<Self> {
        if p.len() != rows.len() {
            return Err(Error::SizeMismatch(p.len(), rows.len()));
        }
        let cols = rows.first().map_or(0, Distribution::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("ragged conditionals".into()));
        }
        let probs = p
            .probs()
            .iter()
            .zip(rows)
            .flat_map(|(px, row)| row.probs().iter().map(move |w| px * w))
            .collect();
        JointDistribution::new(p.len(), cols, probs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, m: usize) -> f64 {
        self.probs[x * self.cols + m]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row_marginal(&self) -> Distribution {
        let probs = self.probs.chunks(self.cols).map(|r| r.iter().sum()).collect();
        Distribution { probs }
    }

    pub fn col_marginal(&self) -> Distribution {
        let mut probs = vec![0.0; self.cols];
        for row in self.probs.chunks(self.cols) {
            for (acc, p) in probs.iter_mut().zip(row) {
                *acc += p;
            }
        }
        Distribution { probs }
    }

    /// `P(m | x)`, or `None` when `x` has zero mass.
    pub fn conditional(&self, x: usize) -> Option<Distribution> {
        let row = &self.probs[x * self.cols..(x + 1) * self.cols];
        let mass: f64 = row.iter().sum();
        (mass > 0.0).then(|| Distribution {
            probs: row.iter().map(|p| p / mass).collect(),
        })
    }
}

/// Probability tensor over `(x, y, z)`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TripartiteDistribution {
    dims: [usize; 3],
    probs: Vec<f64>,
}

impl TripartiteDistribution {
    pub fn new(dims: [usize; 3], probs: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidDistribution("empty tripartite alphabet".into()));
        }
        let size = dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(*d));
        if size != Some(probs.len()) {
            return Err(Error::SizeMismatch(size.unwrap_or(usize::MAX), probs.len()));
        }
        let probs = validated(probs)?;
        Ok(TripartiteDistribution { dims, probs })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Groups `(x, y)` into one system: the joint of `XY` and `Z`.
    pub fn group_first_two(&self) -> JointDistribution {
        let [a, b, c] = self.dims;
        JointDistribution {
            rows: a * b,
            cols: c,
            probs: self.probs.clone(),
        }
    }

    /// Marginal joint of `X` and `Z`.
    pub fn marginal_xz(&self) -> JointDistribution {
        let [a, b, c] = self.dims;
        let mut probs = vec![0.0; a * c];
        for x in 0..a {
            for y in 0..b {
                for z in 0..c {
                    probs[x * c + z] += self.probs[(x * b + y) * c + z];
                }
            }
        }
        JointDistribution { rows: a, cols: c, probs }
    }

    pub fn marginal_x(&self) -> Distribution {
        let [a, b, c] = self.dims;
        let probs = (0..a)
            .map(|x| self.probs[x * b * c..(x + 1) * b * c].iter().sum())
            .collect();
        Distribution { probs }
    }

    /// Joint of `Y` and `Z` conditioned on `X = x`, `None` when `P(x) = 0`.
    pub fn conditional_yz(&self, x: usize) -> Option<JointDistribution> {
        let [_, b, c] = self.dims;
        let block = &self.probs[x * b * c..(x + 1) * b * c];
        let mass: f64 = block.iter().sum();
        (mass > 0.0).then(|| JointDistribution {
            rows: b,
            cols: c,
            probs: block.iter().map(|p| p / mass).collect(),
        })
    }
}

fn plogp_sum(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Shannon entropy in bits.
pub fn entropy(p: &Distribution) -> f64 {
    plogp_sum(p.probs()).max(0.0)
}

/// Binary entropy `H(p)` in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `D(P‖Q)` in bits; `f64::INFINITY` when `supp(P) ⊄ supp(Q)`.
pub fn relative_entropy(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_len(q)?;
    Ok(divergence_unchecked(p.probs(), q.probs()))
}

pub(crate) fn divergence_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&px, &qx) in p.iter().zip(q) {
        if px <= 0.0 {
            continue;
        }
        if qx <= 0.0 {
            return f64::INFINITY;
        }
        total += px * (px / qx).log2();
    }
    // Jensen: the exact value is non-negative.
    total.max(0.0)
}

/// `Σ |P(x) − Q(x)|`, in `[0, 2]`.
pub fn l1_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_len(q)?;
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// `I(X:M) = H(X) + H(M) − H(XM)`.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    let hx = entropy(&j.row_marginal());
    let hm = entropy(&j.col_marginal());
    let hxm = plogp_sum(j.probs());
    hx + hm - hxm
}

/// `I(X:M) = E_x D(P(·|x) ‖ P_M)`.
pub fn mutual_information_divergence_form(j: &JointDistribution) -> f64 {
    let px = j.row_marginal();
    let pm = j.col_marginal();
    (0..j.rows())
        .filter_map(|x| {
            j.conditional(x)
                .map(|row| px.prob(x) * divergence_unchecked(row.probs(), pm.probs()))
        })
        .sum()
}

/// Both sides of the chain rule `I(XY:Z) = I(X:Z) + E_x I(Y:Z | X = x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainRuleSides {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn chain_rule_check(j: &TripartiteDistribution) -> ChainRuleSides {
    let lhs = mutual_information(&j.group_first_two());
    let px = j.marginal_x();
    let conditional: f64 = (0..j.dims()[0])
        .filter_map(|x| {
            j.conditional_yz(x)
                .map(|yz| px.prob(x) * mutual_information(&yz))
        })
        .sum();
    let rhs = mutual_information(&j.marginal_xz()) + conditional;
    ChainRuleSides { lhs, rhs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_malformed_vectors() {
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let p = d(&[0.5 + 4e-10, 0.5]);
        let total: f64 = p.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&d(&[1.0, 0.0])), 0.0);
        assert!((entropy(&d(&[0.5, 0.5])) - 1.0).abs() < 1e-12);
        // -0.75 log2 0.75 - 0.25 log2 0.25
        assert!((entropy(&d(&[0.75, 0.25])) - 0.811_278_124_459_132_9).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let p = d(&[0.3, 0.7]);
        assert_eq!(relative_entropy(&p, &p).unwrap(), 0.0);
        let half = d(&[0.5, 0.5]);
        assert!((relative_entropy(&d(&[1.0, 0.0]), &half).unwrap() - 1.0).abs() < 1e-12);
        // 0.75 log2 1.5 + 0.25 log2 0.5
        let v = relative_entropy(&d(&[0.75, 0.25]), &half).unwrap();
        assert!((v - 0.188_721_875_540_867_1).abs() < 1e-12);
        assert_eq!(
            relative_entropy(&half, &d(&[1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
        assert!(relative_entropy(&half, &d(&[1.0])).is_err());
    }

    #[test]
    fn l1_examples() {
        let p = d(&[0.2, 0.8]);
        assert_eq!(l1_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(l1_distance(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 2.0);
        assert!((l1_distance(&d(&[0.7, 0.3]), &d(&[0.5, 0.5])).unwrap() - 0.4).abs() < 1e-12);
        assert!(l1_distance(&p, &d(&[1.0])).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let j = JointDistribution::product(&d(&[0.3, 0.7]), &d(&[0.1, 0.2, 0.7]));
        assert!(mutual_information(&j).abs() < 1e-12);
        let copy = JointDistribution::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((mutual_information(&copy) - 1.0).abs() < 1e-12);
        assert!((mutual_information_divergence_form(&copy) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_rule_examples() {
        // Fully independent triple.
        let probs: Vec<f64> = vec![1.0 / 8.0; 8];
        let t = TripartiteDistribution::new([2, 2, 2], probs).unwrap();
        let s = chain_rule_check(&t);
        assert!(s.lhs.abs() < 1e-12 && s.rhs.abs() < 1e-12);

        // Z = X, Y independent uniform, X ~ (0.25, 0.75).
        let px = [0.25, 0.75];
        let mut probs = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                probs[(x * 2 + y) * 2 + x] = px[x] * 0.5;
            }
        }
        let t = TripartiteDistribution::new([2, 2, 2], probs).unwrap();
        let s = chain_rule_check(&t);
        let hx = entropy(&d(&px));
        assert!((s.lhs - hx).abs() < 1e-12 && (s.rhs - hx).abs() < 1e-12);
    }

    #[test]
    fn sampling_skips_zero_mass_symbols() {
        let p = d(&[0.5, 0.0, 0.5]);
        let cdf = p.cdf();
        assert_eq!(p.sample_with(&cdf, 0.0), 0);
        assert_eq!(p.sample_with(&cdf, 0.5), 2);
        assert_eq!(p.sample_with(&cdf, 0.999_999), 2);
        let tail = d(&[0.5, 0.5, 0.0]);
        assert_eq!(tail.sample_with(&tail.cdf(), 0.999_999), 1);
    }

    #[test]
    fn serde_round_trip_validates() {
        let p: Distribution = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(p.probs(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<Distribution>("[0.25, 0.25]").is_err());
    }
}
