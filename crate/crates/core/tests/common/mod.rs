//! Test-side oracles, written independently of the library's algorithms.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector; roughly one entry in five is zeroed when
/// `sparse`, but never all of them.
pub fn random_probs(n: usize, sparse: bool, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if sparse && rng.gen_bool(0.2) {
                    0.0
                } else {
                    -rng.gen::<f64>().max(1e-300).ln()
                }
            })
            .collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.iter().map(|v| v / s).collect();
        }
    }
}

pub fn random_matrix(rows: usize, cols: usize, sparse: bool, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..rows).map(|_| random_probs(cols, sparse, rng)).collect()
}

/// `Σ_x μ(x) Σ_y W(y|x) log₂(W(y|x) / (μW)(y))`.
pub fn mutual_information(mu: &[f64], w: &[Vec<f64>]) -> f64 {
    let cols = w[0].len();
    let out: Vec<f64> = (0..cols)
        .map(|y| mu.iter().zip(w).map(|(m, row)| m * row[y]).sum())
        .collect();
    let mut total = 0.0;
    for (m, row) in mu.iter().zip(w) {
        if *m <= 0.0 {
            continue;
        }
        for (wy, oy) in row.iter().zip(&out) {
            if *wy > 0.0 {
                total += m * wy * (wy / oy).log2();
            }
        }
    }
    total
}

/// Lattice points `center + h·(o_1, …, o_{n−1}, −Σo)` with `|o_j| ≤ reach`
/// that stay in the simplex.
fn neighbourhood(center: &[f64], h: f64, reach: i32) -> Vec<Vec<f64>> {
    let n = center.len();
    let mut out = Vec::new();
    let mut offs = vec![-reach; n - 1];
    loop {
        let mut p = center.to_vec();
        let mut sum = 0.0;
        for (j, o) in offs.iter().enumerate() {
            p[j] += h * *o as f64;
            sum += h * *o as f64;
        }
        p[n - 1] -= sum;
        if p.iter().all(|v| *v >= -1e-15) {
            out.push(p.iter().map(|v| v.max(0.0)).collect());
        }
        let mut j = 0;
        loop {
            if j == n - 1 {
                return out;
            }
            offs[j] += 1;
            if offs[j] <= reach {
                break;
            }
            offs[j] = -reach;
            j += 1;
        }
    }
}

/// Capacity by exhaustive simplex grid followed by shrinking pattern
/// search; exploits only concavity of `μ ↦ I(μ)`.
pub fn capacity_grid(w: &[Vec<f64>]) -> f64 {
    let n = w.len();
    if n == 1 {
        return 0.0;
    }
    let uniform = vec![1.0 / n as f64; n];
    let steps = 24;
    let mut best = uniform.clone();
    let mut best_val = mutual_information(&best, w);
    // Coarse grid: compositions of `steps` into n parts.
    let mut comp = vec![0usize; n];
    fn rec(j: usize, left: usize, comp: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if j == comp.len() - 1 {
            comp[j] = left;
            visit(comp);
            return;
        }
        for v in 0..=left {
            comp[j] = v;
            rec(j + 1, left - v, comp, visit);
        }
    }
    rec(0, steps, &mut comp, &mut |c| {
        let mu: Vec<f64> = c.iter().map(|v| *v as f64 / steps as f64).collect();
        let val = mutual_information(&mu, w);
        if val > best_val {
            best_val = val;
            best = mu;
        }
    });
    let mut h = 1.0 / steps as f64;
    while h > 1e-9 {
        let mut improved = false;
        for p in neighbourhood(&best, h, 2) {
            let val = mutual_information(&p, w);
            if val > best_val + 1e-15 {
                best_val = val;
                best = p;
                improved = true;
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    best_val
}

pub fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| if *b > 0.0 { a * (a / b).log2() } else { f64::INFINITY })
        .sum()
}

pub fn l1(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

/// `P` conditioned on `{x : P(x) ≤ 2^{rk} Q(x)}` with `k = D(P‖Q) + 1`.
pub fn smoothed(p: &[f64], q: &[f64], r: f64) -> Vec<f64> {
    let k = kl_bits(p, q) + 1.0;
    let t = 2f64.powf(r * k);
    let kept: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(a, b)| if *a > t * b { 0.0 } else { *a })
        .collect();
    let s: f64 = kept.iter().sum();
    kept.iter().map(|v| v / s).collect()
}
