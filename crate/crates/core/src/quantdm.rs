//! Small-dimension density operators and numerical checks of the quantum
//! entropic inequalities the direct-sum argument relies on.
//!
//! Matrix functions go through the Hermitian eigendecomposition. Eigenvalues
//! below [`SUPPORT_THRESHOLD`] are outside the support; logarithms clip
//! eigenvalues at [`LOG_CLIP`].

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::probcore::Distribution;
use crate::rng::mix64;

pub type C64 = Complex<f64>;

pub const MAX_DIM: usize = 16;
pub const SUPPORT_THRESHOLD: f64 = 1e-10;
pub const LOG_CLIP: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;

/// Positive semidefinite, unit-trace Hermitian matrix of dimension `≤ 16`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    m: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let d = m.nrows();
        if d == 0 || m.ncols() != d {
            return Err(param("density operator must be a non-empty square matrix"));
        }
        if d > MAX_DIM {
            return Err(param(format!("dimension {d} exceeds {MAX_DIM}")));
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(param("density operator has non-finite entries"));
        }
        let adjoint = m.adjoint();
        if (&m - &adjoint).iter().any(|z| z.norm() > HERMITIAN_TOL) {
            return Err(param("density operator is not Hermitian"));
        }
        let m = (&m + adjoint).scale(0.5);
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(param(format!("trace {trace} differs from 1")));
        }
        let eig = SymmetricEigen::new(m.clone());
        if eig.eigenvalues.iter().any(|l| *l < -SUPPORT_THRESHOLD) {
            return Err(param("density operator has a negative eigenvalue"));
        }
        Ok(DensityOperator { m: m.unscale(trace) })
    }

    pub fn diagonal(probs: &Distribution) -> Result<Self> {
        let d = probs.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, p) in probs.probs().iter().enumerate() {
            m[(i, i)] = C64::new(*p, 0.0);
        }
        DensityOperator::new(m)
    }

    /// `|ψ⟩⟨ψ|` for the normalized `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(param("state vector must be non-zero"));
        }
        let v = v.unscale(norm);
        DensityOperator::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        DensityOperator::new(DMatrix::identity(d, d).unscale(d as f64))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    /// Eigenvalues clipped to `[0, ∞)`.
    pub fn spectrum(&self) -> Vec<f64> {
        SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .map(|l| l.max(0.0))
            .collect()
    }

    /// Convex combination `Σ w_i ρ_i`.
    pub fn mixture(weights: &Distribution, states: &[DensityOperator]) -> Result<Self> {
        let d = common_dim(states)?;
        if weights.len() != states.len() {
            return Err(Error::SizeMismatch(weights.len(), states.len()));
        }
        let mut m = DMatrix::zeros(d, d);
        for (w, s) in weights.probs().iter().zip(states) {
            m += s.m.scale(*w);
        }
        DensityOperator::new(m)
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &DMatrix<C64>) -> Result<Self> {
        DensityOperator::new(u * &self.m * u.adjoint())
    }

    /// Reduced state on the second factor of `A ⊗ B`.
    pub fn trace_out_first(&self, dims: (usize, usize)) -> Result<Self> {
        let (da, db) = self.split(dims)?;
        let mut out = DMatrix::zeros(db, db);
        for a in 0..da {
            for i in 0..db {
                for j in 0..db {
                    out[(i, j)] += self.m[(a * db + i, a * db + j)];
                }
            }
        }
        DensityOperator::new(out)
    }

    /// Reduced state on the first factor of `A ⊗ B`.
    pub fn trace_out_second(&self, dims: (usize, usize)) -> Result<Self> {
        let (da, db) = self.split(dims)?;
        let mut out = DMatrix::zeros(da, da);
        for i in 0..da {
            for j in 0..da {
                for b in 0..db {
                    out[(i, j)] += self.m[(i * db + b, j * db + b)];
                }
            }
        }
        DensityOperator::new(out)
    }

    fn split(&self, (da, db): (usize, usize)) -> Result<(usize, usize)> {
        if da.checked_mul(db) != Some(self.dim()) {
            return Err(param(format!(
                "dimension {} does not factor as {da}×{db}",
                self.dim()
            )));
        }
        Ok((da, db))
    }
}

fn common_dim(states: &[DensityOperator]) -> Result<usize> {
    let d = states
        .first()
        .map(DensityOperator::dim)
        .ok_or_else(|| param("need at least one state"))?;
    if let Some(s) = states.iter().find(|s| s.dim() != d) {
        return Err(Error::SizeMismatch(d, s.dim()));
    }
    Ok(d)
}

fn check_dims(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::SizeMismatch(rho.dim(), sigma.dim()));
    }
    Ok(())
}

fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|l| **l > LOG_CLIP)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(&rho.spectrum())
}

/// `Tr ρ log σ` restricted to `supp(σ)`, or `None` if `supp(ρ) ⊄ supp(σ)`.
fn cross_term(rho: &DensityOperator, sigma: &DensityOperator) -> Option<f64> {
    let eig = SymmetricEigen::new(sigma.m.clone());
    let mut total = 0.0;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let weight = (v.adjoint() * &rho.m * v)[(0, 0)].re;
        if *lambda <= SUPPORT_THRESHOLD {
            if weight > SUPPORT_THRESHOLD {
                return None;
            }
            continue;
        }
        total += weight * lambda.max(LOG_CLIP).log2();
    }
    Some(total)
}

/// `S(ρ‖σ) = Tr ρ (log ρ − log σ)` in bits; infinite when
/// `supp(ρ) ⊄ supp(σ)`.
pub fn qrelative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(match cross_term(rho, sigma) {
        None => f64::INFINITY,
        Some(cross) => (-vn_entropy(rho) - cross).max(0.0),
    })
}

/// `‖ρ − σ‖₁`, the sum of absolute eigenvalues of `ρ − σ`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(SymmetricEigen::new(&rho.m - &sigma.m)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum())
}

/// Classical-quantum ensemble `{(p_x, ρ_x)}`.
#[derive(Clone, Debug)]
pub struct CqEnsemble {
    probs: Distribution,
    states: Vec<DensityOperator>,
}

impl CqEnsemble {
    pub fn new(probs: Distribution, states: Vec<DensityOperator>) -> Result<Self> {
        common_dim(&states)?;
        if probs.len() != states.len() {
            return Err(Error::SizeMismatch(probs.len(), states.len()));
        }
        Ok(CqEnsemble { probs, states })
    }

    pub fn probs(&self) -> &Distribution {
        &self.probs
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn average(&self) -> Result<DensityOperator> {
        DensityOperator::mixture(&self.probs, &self.states)
    }
}

/// `χ = S(ρ̄) − Σ p_x S(ρ_x)`.
pub fn holevo(ens: &CqEnsemble) -> Result<f64> {
    let avg = ens.average()?;
    let inner: f64 = ens
        .probs
        .probs()
        .iter()
        .zip(&ens.states)
        .map(|(p, s)| p * vn_entropy(s))
        .sum();
    Ok(vn_entropy(&avg) - inner)
}

/// `χ = E_x S(ρ_x ‖ ρ̄)`.
pub fn holevo_divergence_form(ens: &CqEnsemble) -> Result<f64> {
    let avg = ens.average()?;
    ens.probs
        .probs()
        .iter()
        .zip(&ens.states)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, s)| Ok(p * qrelative_entropy(s, &avg)?))
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct CqCapacity {
    pub capacity: f64,
    pub input: Distribution,
    #[serde(skip)]
    pub average: DensityOperator,
    pub iterations: usize,
    /// `max_x S(ρ_x ‖ τ*) − χ(μ*)`.
    pub gap: f64,
}

/// Holevo capacity of the c-q channel `x ↦ ρ_x` by multiplicative updates
/// `μ(x) ← μ(x) 2^{S(ρ_x ‖ ρ̄_μ)}`, stopped on the certified gap.
pub fn cq_capacity(states: &[DensityOperator], tol: f64, max_iter: usize) -> Result<CqCapacity> {
    common_dim(states)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(param("capacity tolerance must be positive"));
    }
    let self_entropy: Vec<f64> = states.iter().map(vn_entropy).collect();
    let n = states.len();
    let mut mu = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    loop {
        let weights = Distribution::new(mu.clone())?;
        let average = DensityOperator::mixture(&weights, states)?;
        let divergences = states
            .iter()
            .zip(&self_entropy)
            .map(|(s, h)| {
                // The average dominates every state with μ(x) > 0.
                cross_term(s, &average).map_or(f64::INFINITY, |c| (-h - c).max(0.0))
            })
            .collect::<Vec<_>>();
        let chi: f64 = mu.iter().zip(&divergences).map(|(m, d)| m * d).sum();
        let top = divergences.iter().copied().fold(0.0, f64::max);
        let gap = (top - chi).max(0.0);
        if gap <= tol {
            return Ok(CqCapacity {
                capacity: chi,
                input: weights,
                average,
                iterations,
                gap,
            });
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence { iterations, gap });
        }
        for (m, d) in mu.iter_mut().zip(&divergences) {
            *m *= (d - top).exp2();
        }
        let z: f64 = mu.iter().sum();
        mu.iter_mut().for_each(|m| *m /= z);
        iterations += 1;
    }
}

/// Grid search of the Holevo quantity over the input simplex, for two or
/// three inputs, with successive local refinement.
pub fn cq_capacity_grid(states: &[DensityOperator], steps: usize) -> Result<(f64, Distribution)> {
    common_dim(states)?;
    let n = states.len();
    if !(2..=3).contains(&n) || steps == 0 {
        return Err(param("grid search supports 2 or 3 inputs and steps ≥ 1"));
    }
    let eval = |w: &[f64]| -> Result<f64> {
        holevo(&CqEnsemble::new(Distribution::new(w.to_vec())?, states.to_vec())?)
    };
    let mut best = (f64::NEG_INFINITY, vec![1.0 / n as f64; n]);
    let mut center = best.1.clone();
    let mut radius = 1.0;
    for _ in 0..4 {
        let h = radius / steps as f64;
        for i in 0..=2 * steps {
            for j in 0..=if n == 3 { 2 * steps } else { 0 } {
                let a = center[0] + (i as f64 - steps as f64) * h;
                let w = if n == 2 {
                    vec![a, 1.0 - a]
                } else {
                    let b = center[1] + (j as f64 - steps as f64) * h;
                    vec![a, b, 1.0 - a - b]
                };
                if w.iter().any(|p| *p < 0.0 || *p > 1.0) {
                    continue;
                }
                let v = eval(&w)?;
                if v > best.0 {
                    best = (v, w);
                }
            }
        }
        center = best.1.clone();
        radius = 2.0 * h;
    }
    Ok((best.0, Distribution::new(best.1)?))
}

/// `GG†/Tr(GG†)` for a complex Gaussian `G`.
pub fn ginibre_state<R: Rng>(d: usize, rng: &mut R) -> Result<DensityOperator> {
    let g = gaussian_matrix(d, d, rng);
    let m = &g * g.adjoint();
    let trace = m.trace().re;
    DensityOperator::new(m.unscale(trace))
}

pub fn random_pure_state<R: Rng>(d: usize, rng: &mut R) -> Result<DensityOperator> {
    let v = gaussian_matrix(d, 1, rng);
    DensityOperator::pure(v.as_slice())
}

/// Haar-distributed unitary: QR of a Gaussian matrix with phase correction.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = gaussian_matrix(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    q * phases
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn random_distribution<R: Rng>(n: usize, rng: &mut R) -> Result<Distribution> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    Distribution::from_weights(&w)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(trial)))
}

/// Largest observed margin of a sampled inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactCheck {
    pub fact: String,
    pub trials: usize,
    /// `max (lhs − rhs)`; non-positive when the inequality held everywhere.
    pub max_margin: f64,
    /// Trials with `lhs − rhs > threshold`.
    pub violations: usize,
    pub threshold: f64,
}

impl FactCheck {
    fn from_margins(fact: &str, threshold: f64, margins: impl Iterator<Item = Result<f64>>) -> Result<Self> {
        let mut check = FactCheck {
            fact: fact.to_owned(),
            trials: 0,
            max_margin: f64::NEG_INFINITY,
            violations: 0,
            threshold,
        };
        for m in margins {
            let m = m?;
            check.trials += 1;
            check.max_margin = check.max_margin.max(m);
            if m > threshold {
                check.violations += 1;
            }
        }
        Ok(check)
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Random `ρ_{XMN}` with `I(X:M) = 0`: a fixed state `ω` on `M ⊗ N` rotated
/// per `x` by a unitary acting on `N` only. Even trials use a pure `ω`.
pub fn lowinfent_instance<R: Rng>(dims: (usize, usize), pure: bool, rng: &mut R) -> Result<CqEnsemble> {
    let (dm, dn) = dims;
    let d = dm * dn;
    let omega = if pure {
        random_pure_state(d, rng)?
    } else {
        ginibre_state(d, rng)?
    };
    let nx = rng.gen_range(2..=4);
    let probs = random_distribution(nx, rng)?;
    let id_m = DMatrix::<C64>::identity(dm, dm);
    let states = (0..nx)
        .map(|_| omega.conjugate(&id_m.kronecker(&random_unitary(dn, rng))))
        .collect::<Result<Vec<_>>>()?;
    CqEnsemble::new(probs, states)
}

/// Margin `I(X:MN) − 2 S(N)` over random instances with `I(X:M) = 0`.
pub fn check_lowinfent(trials: usize, dims: (usize, usize), seed: u64) -> Result<FactCheck> {
    let (dm, dn) = dims;
    if dm == 0 || dn == 0 || dm * dn > MAX_DIM {
        return Err(param("lowinfent dimensions must satisfy 1 ≤ dM·dN ≤ 16"));
    }
    FactCheck::from_margins(
        "lowinfent",
        1e-7,
        (0..trials).map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let ens = lowinfent_instance(dims, t % 2 == 0, &mut rng)?;
            let s_n = vn_entropy(&ens.average()?.trace_out_first(dims)?);
            Ok(holevo(&ens)? - 2.0 * s_n)
        }),
    )
}

/// Margin `‖ρ − σ‖₁ − √2 · S(ρ‖σ)^{1/2}` over random full-support pairs.
pub fn check_entropytrace(trials: usize, d: usize, seed: u64) -> Result<FactCheck> {
    check_dim(d)?;
    FactCheck::from_margins(
        "entropytrace",
        1e-7,
        (0..trials).map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let rho = ginibre_state(d, &mut rng)?;
            let sigma = ginibre_state(d, &mut rng)?;
            Ok(trace_distance(&rho, &sigma)?
                - std::f64::consts::SQRT_2 * qrelative_entropy(&rho, &sigma)?.sqrt())
        }),
    )
}

/// `|χ − E_x S(ρ_x‖ρ̄)|` over random ensembles of two to four states.
pub fn check_altchar(trials: usize, d: usize, seed: u64) -> Result<FactCheck> {
    check_dim(d)?;
    FactCheck::from_margins(
        "altchar",
        1e-8,
        (0..trials).map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let n = rng.gen_range(2..=4);
            let probs = random_distribution(n, &mut rng)?;
            let states = (0..n)
                .map(|i| {
                    if (t + i) % 3 == 0 {
                        random_pure_state(d, &mut rng)
                    } else {
                        ginibre_state(d, &mut rng)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let ens = CqEnsemble::new(probs, states)?;
            Ok((holevo(&ens)? - holevo_divergence_form(&ens)?).abs())
        }),
    )
}

/// Margin `S(pρ₁+(1−p)ρ₂ ‖ pσ₁+(1−p)σ₂) − p S(ρ₁‖σ₁) − (1−p) S(ρ₂‖σ₂)`.
pub fn check_joint_convexity(trials: usize, d: usize, seed: u64) -> Result<FactCheck> {
    check_dim(d)?;
    FactCheck::from_margins(
        "jointconvexity",
        1e-8,
        (0..trials).map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let p: f64 = rng.gen_range(0.01..0.99);
            let w = Distribution::new(vec![p, 1.0 - p])?;
            let rhos = [ginibre_state(d, &mut rng)?, ginibre_state(d, &mut rng)?];
            let sigmas = [ginibre_state(d, &mut rng)?, ginibre_state(d, &mut rng)?];
            let lhs = qrelative_entropy(
                &DensityOperator::mixture(&w, &rhos)?,
                &DensityOperator::mixture(&w, &sigmas)?,
            )?;
            let rhs = p * qrelative_entropy(&rhos[0], &sigmas[0])?
                + (1.0 - p) * qrelative_entropy(&rhos[1], &sigmas[1])?;
            Ok(lhs - rhs)
        }),
    )
}

fn check_dim(d: usize) -> Result<()> {
    if !(1..=MAX_DIM).contains(&d) {
        return Err(param(format!("dimension must lie in 1..={MAX_DIM}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::binary_entropy;

    fn ket(v: &[f64]) -> DensityOperator {
        let psi: Vec<C64> = v.iter().map(|x| C64::new(*x, 0.0)).collect();
        DensityOperator::pure(&psi).unwrap()
    }

    fn zero() -> DensityOperator {
        ket(&[1.0, 0.0])
    }

    fn plus() -> DensityOperator {
        ket(&[1.0, 1.0])
    }

    /// `H(cos²(π/8))`: eigenvalues of `(|0⟩⟨0| + |+⟩⟨+|)/2` are `(1 ± 1/√2)/2`.
    fn zero_plus_entropy() -> f64 {
        binary_entropy((1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0)
    }

    #[test]
    fn validation() {
        let not_hermitian = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
        );
        assert!(DensityOperator::new(not_hermitian).is_err());
        let negative = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        assert!(DensityOperator::new(negative).is_err());
        assert!(DensityOperator::maximally_mixed(17).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(vn_entropy(&zero()).abs() < 1e-12);
        assert!((vn_entropy(&DensityOperator::maximally_mixed(2).unwrap()) - 1.0).abs() < 1e-12);
        let w = Distribution::uniform(2).unwrap();
        let mix = DensityOperator::mixture(&w, &[zero(), plus()]).unwrap();
        assert!((vn_entropy(&mix) - zero_plus_entropy()).abs() < 1e-12);
        assert!((zero_plus_entropy() - 0.6009).abs() < 1e-4);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = ginibre_state(3, &mut trial_rng(1, 1)).unwrap();
        assert!(qrelative_entropy(&rho, &rho).unwrap().abs() < 1e-10);
        let a = DensityOperator::diagonal(&Distribution::new(vec![0.75, 0.25]).unwrap()).unwrap();
        let b = DensityOperator::maximally_mixed(2).unwrap();
        assert!((qrelative_entropy(&a, &b).unwrap() - 0.188_721_875_540_867_1).abs() < 1e-10);
        assert!((qrelative_entropy(&zero(), &b).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(qrelative_entropy(&b, &zero()).unwrap(), f64::INFINITY);
        assert!(qrelative_entropy(&b, &DensityOperator::maximally_mixed(3).unwrap()).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        assert!(trace_distance(&plus(), &plus()).unwrap().abs() < 1e-12);
        assert!((trace_distance(&zero(), &ket(&[0.0, 1.0])).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn holevo_examples() {
        let half = Distribution::uniform(2).unwrap();
        let same = CqEnsemble::new(half.clone(), vec![plus(), plus()]).unwrap();
        assert!(holevo(&same).unwrap().abs() < 1e-12);
        let basis = CqEnsemble::new(half.clone(), vec![zero(), ket(&[0.0, 1.0])]).unwrap();
        assert!((holevo(&basis).unwrap() - 1.0).abs() < 1e-12);
        let zp = CqEnsemble::new(half, vec![zero(), plus()]).unwrap();
        assert!((holevo(&zp).unwrap() - zero_plus_entropy()).abs() < 1e-10);
        assert!((holevo_divergence_form(&zp).unwrap() - zero_plus_entropy()).abs() < 1e-8);
    }

    #[test]
    fn cq_capacity_examples() {
        let basis = cq_capacity(&[zero(), ket(&[0.0, 1.0])], 1e-9, 1000).unwrap();
        assert!((basis.capacity - 1.0).abs() < 1e-9);
        assert!((basis.input.prob(0) - 0.5).abs() < 1e-9);
        let same = cq_capacity(&[plus(), plus()], 1e-9, 1000).unwrap();
        assert!(same.capacity.abs() < 1e-9);
        let zp = cq_capacity(&[zero(), plus()], 1e-9, 1000).unwrap();
        assert!((zp.capacity - zero_plus_entropy()).abs() < 1e-8);
        assert!((zp.input.prob(0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn partial_traces_of_product() {
        let mut rng = trial_rng(3, 0);
        let a = ginibre_state(2, &mut rng).unwrap();
        let b = ginibre_state(3, &mut rng).unwrap();
        let ab = DensityOperator::new(a.matrix().kronecker(b.matrix())).unwrap();
        let tb = ab.trace_out_first((2, 3)).unwrap();
        let ta = ab.trace_out_second((2, 3)).unwrap();
        assert!(trace_distance(&tb, &b).unwrap() < 1e-12);
        assert!(trace_distance(&ta, &a).unwrap() < 1e-12);
        assert!(ab.trace_out_first((4, 2)).is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(4, &mut trial_rng(9, 9));
        let err = (&u * u.adjoint() - DMatrix::<C64>::identity(4, 4)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn lowinfent_identical_states() {
        // All per-x states identical: I(X:MN) = 0.
        let w = Distribution::uniform(3).unwrap();
        let omega = ginibre_state(4, &mut trial_rng(5, 0)).unwrap();
        let ens = CqEnsemble::new(w, vec![omega.clone(), omega.clone(), omega]).unwrap();
        assert!(holevo(&ens).unwrap().abs() < 1e-10);
    }

    #[test]
    fn lowinfent_rotation_on_n_keeps_m_marginal() {
        let mut rng = trial_rng(11, 0);
        let ens = lowinfent_instance((2, 2), true, &mut rng).unwrap();
        let m_marginals = ens
            .states()
            .iter()
            .map(|s| s.trace_out_second((2, 2)))
            .collect::<Result<Vec<_>>>()
            .unwrap();
        let on_m = CqEnsemble::new(ens.probs().clone(), m_marginals).unwrap();
        assert!(holevo(&on_m).unwrap().abs() < 1e-9);
        let s_n = vn_entropy(&ens.average().unwrap().trace_out_first((2, 2)).unwrap());
        assert!(holevo(&ens).unwrap() <= 2.0 * s_n + 1e-9);
    }

    #[test]
    fn entropytrace_on_identical_states() {
        let rho = ginibre_state(2, &mut trial_rng(2, 2)).unwrap();
        let margin = trace_distance(&rho, &rho).unwrap()
            - std::f64::consts::SQRT_2 * qrelative_entropy(&rho, &rho).unwrap().sqrt();
        assert!(margin <= 1e-7);
    }
}
