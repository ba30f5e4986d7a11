//! Mixed-radix encoding of tuples into flat indices.
//!
//! Coordinate 0 is the most significant digit, so flat order matches the
//! lexicographic order of tuples.

use crate::error::{param, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedRadix {
    radices: Vec<u128>,
    size: u128,
}

impl MixedRadix {
    pub fn new(radices: Vec<u128>) -> Result<Self> {
        if radices.is_empty() || radices.contains(&0) {
            return Err(param("radices must be non-empty and positive"));
        }
        let size = radices
            .iter()
            .try_fold(1u128, |acc, r| acc.checked_mul(*r))
            .ok_or_else(|| param("mixed-radix space overflows 128 bits"))?;
        Ok(MixedRadix { radices, size })
    }

    pub fn uniform(radix: u128, k: usize) -> Result<Self> {
        MixedRadix::new(vec![radix; k])
    }

    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn arity(&self) -> usize {
        self.radices.len()
    }

    pub fn radices(&self) -> &[u128] {
        &self.radices
    }

    /// Caller guarantees `digits[j] < radices[j]`.
    pub fn encode(&self, digits: &[u128]) -> u128 {
        debug_assert_eq!(digits.len(), self.radices.len());
        digits
            .iter()
            .zip(&self.radices)
            .fold(0u128, |acc, (d, r)| acc * r + d)
    }

    pub fn decode(&self, mut index: u128) -> Vec<u128> {
        let mut digits = vec![0u128; self.radices.len()];
        for (d, r) in digits.iter_mut().zip(&self.radices).rev() {
            *d = index % r;
            index /= r;
        }
        digits
    }
}
