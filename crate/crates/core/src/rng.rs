//! Counter-based shared randomness.
//!
//! A [`SharedKey`] names a family of independent streams. Position `t` of
//! stream `s` is a pure function of `(key, s, t)`, so two parties holding the
//! same key reproduce identical draws without communicating, and a party can
//! jump straight to any position.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Each draw consumes exactly one `u64`, i.e. two 32-bit ChaCha words.
const WORDS_PER_DRAW: u128 = 2;

/// Role tags for domain separation.
pub mod domain {
    pub const ALICE: u64 = 0xA11C_E000;
    pub const BOB: u64 = 0x0000_B0B0;
    pub const PUBLIC: u64 = 0x0B11_C000;
    pub const REFEREE: u64 = 0x4EFE_4EE0;
    pub const SHARED_SAMPLES: u64 = 0x5A3B_1E50;
    pub const ACCEPT_COINS: u64 = 0xACCE_B700;
    pub const FILLER: u64 = 0xF111_E400;
    pub const TRIALS: u64 = 0x7419_1A50;
    pub const INPUTS: u64 = 0x1B9B_7500;
    pub const FINGERPRINT: u64 = 0xF19E_4B41;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SharedKey {
    seed: u64,
    domain: u64,
}

impl SharedKey {
    pub fn new(seed: u64, domain: u64) -> Self {
        SharedKey { seed, domain }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Key for a sub-experiment, e.g. one trial of a sweep.
    pub fn derive(&self, label: u64) -> SharedKey {
        SharedKey {
            seed: mix64(self.seed ^ mix64(label.wrapping_add(self.domain))),
            domain: self.domain,
        }
    }

    pub fn with_domain(&self, domain: u64) -> SharedKey {
        SharedKey {
            seed: self.seed,
            domain,
        }
    }

    pub fn stream(&self, stream: u64) -> Stream {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.domain.to_le_bytes());
        bytes[16..24].copy_from_slice(&mix64(self.seed ^ self.domain).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(stream);
        Stream { rng }
    }
}

/// Sequential reader over one stream, with random access by draw index.
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn seek(&mut self, draw: u64) {
        self.rng.set_word_pos(draw as u128 * WORDS_PER_DRAW);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `0..size`, where `1 ≤ size ≤ 2^64`. Consumes one draw when
    /// `size` is a power of two, otherwise a variable number.
    pub fn below(&mut self, size: u128) -> u64 {
        debug_assert!(size >= 1 && size <= 1u128 << 64);
        if size == 1u128 << 64 {
            return self.rng.next_u64();
        }
        let size = size as u64;
        if size.is_power_of_two() {
            return self.rng.next_u64() & (size - 1);
        }
        self.rng.gen_range(0..size)
    }

    /// Uniform on `0..size` for any `size ≥ 1`.
    pub fn below_wide(&mut self, size: u128) -> u128 {
        debug_assert!(size >= 1);
        if size <= 1u128 << 64 {
            return self.below(size) as u128;
        }
        self.rng.gen_range(0..size)
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seek_reproduces_sequential_draws() {
        let key = SharedKey::new(7, domain::SHARED_SAMPLES);
        let mut a = key.stream(3);
        let draws: Vec<u64> = (0..40).map(|_| a.next_u64()).collect();
        let mut b = key.stream(3);
        for t in [39u64, 0, 17, 5] {
            b.seek(t);
            assert_eq!(b.next_u64(), draws[t as usize]);
        }
    }

    #[test]
    fn domains_and_streams_are_separated() {
        let k = SharedKey::new(1, domain::ALICE);
        let first = |key: SharedKey, s| key.stream(s).next_u64();
        assert_ne!(first(k, 0), first(k, 1));
        assert_ne!(first(k, 0), first(k.with_domain(domain::BOB), 0));
        assert_ne!(first(k, 0), first(k.derive(1), 0));
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = SharedKey::new(0, 0).stream(0);
        for size in [1u128, 2, 3, 7, 1 << 20, 1 << 64] {
            for _ in 0..100 {
                assert!((s.below(size) as u128) < size);
            }
        }
    }
}
