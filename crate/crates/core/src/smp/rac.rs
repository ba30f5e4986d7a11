//! Classical random access codes: exact optimum by brute force and the
//! entropy lower bound on message length.

use serde::Serialize;

use crate::error::{param, Result};
use crate::probcore::binary_entropy;

/// Largest `m·2^n + n·2^m` searched.
pub const RAC_BUDGET: u64 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RacOptimum {
    pub n: u32,
    pub m: u32,
    /// Best number of correctly decoded `(x, i)` pairs.
    pub successes: u64,
    /// `n · 2^n`.
    pub total: u64,
}

impl RacOptimum {
    pub fn success(&self) -> f64 {
        self.successes as f64 / self.total as f64
    }

    pub fn error(&self) -> f64 {
        1.0 - self.success()
    }
}

pub fn rac_feasible(n: u32, m: u32) -> bool {
    n >= 1
        && n < 32
        && m < 32
        && (m as u64) * (1u64 << n) + (n as u64) * (1u64 << m) <= RAC_BUDGET
}

/// Maximum average success over deterministic encoders `{0,1}^n → {0,1}^m`
/// and decoders `({0,1}^m, i) → bit`, for uniform `x` and `i`.
///
/// For a fixed encoder the best decoder answers, for each message and
/// index, the majority bit among inputs mapped to that message; the search
/// therefore only enumerates encoders.
pub fn rac_bruteforce(n: u32, m: u32) -> Result<RacOptimum> {
    if !rac_feasible(n, m) {
        return Err(param(format!(
            "exhaustive search needs n ≥ 1 and m·2^n + n·2^m ≤ {RAC_BUDGET}, got n={n}, m={m}"
        )));
    }
    let inputs = 1usize << n;
    let messages = 1u64 << m;
    let n = n as usize;
    let mut encoder = vec![0u64; inputs];
    let mut best = 0u64;
    let mut counts = vec![[0u64; 2]; (messages as usize) * n];
    loop {
        counts.iter_mut().for_each(|c| *c = [0, 0]);
        for (x, &msg) in encoder.iter().enumerate() {
            for i in 0..n {
                counts[msg as usize * n + i][(x >> i) & 1] += 1;
            }
        }
        let score: u64 = counts.iter().map(|c| c[0].max(c[1])).sum();
        best = best.max(score);
        // Odometer over encoders.
        let mut pos = 0;
        loop {
            if pos == inputs {
                return Ok(RacOptimum {
                    n: n as u32,
                    m: m as u32,
                    successes: best,
                    total: (n * inputs) as u64,
                });
            }
            encoder[pos] += 1;
            if encoder[pos] < messages {
                break;
            }
            encoder[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NayakCertificate {
    pub epsilon: f64,
    pub n: u32,
    pub m: u32,
    /// `(1 − H(ε))·n`.
    pub rhs: f64,
    pub satisfied: bool,
}

/// Any classical code with average error `ε` needs `m ≥ (1 − H(ε))·n`.
pub fn nayak_certificate(epsilon: f64, n: u32, m: u32) -> Result<NayakCertificate> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(param(format!("epsilon = {epsilon} must lie in [0, 1/2]")));
    }
    let rhs = (1.0 - binary_entropy(epsilon)) * n as f64;
    Ok(NayakCertificate {
        epsilon,
        n,
        m,
        rhs,
        satisfied: m as f64 >= rhs - 1e-12,
    })
}
