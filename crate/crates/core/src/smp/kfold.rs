//! k-fold products of protocols and relations.
//!
//! Copy `j` of a product input is digit `j` of its mixed-radix index
//! (copy 0 most significant). Message `j` occupies bits
//! `w·(k−1−j) .. w·(k−j)` of the packed message.

use std::sync::Arc;

use crate::error::{param, Result};
use crate::radix::MixedRadix;
use crate::rng::{domain, SharedKey, Stream};

use super::{low_bits, CoinSpace, PlayerView, RandomnessModel, RefereeView, RelationSpec, SmpProtocol, FULL_SEED};

/// Largest product output alphabet.
const MAX_OUTPUTS: u128 = 1 << 24;

/// Splits one atom of a product coin source into `k` base atoms. Small
/// products are exact mixed-radix decodings; larger ones treat the atom as a
/// seed and expand it.
#[derive(Clone, Debug)]
struct CopyCoins {
    base: u128,
    k: usize,
    tag: u64,
    product: Option<MixedRadix>,
}

impl CopyCoins {
    fn new(base: u128, k: usize, tag: u64) -> Self {
        let product = MixedRadix::uniform(base, k)
            .ok()
            .filter(|r| r.size() <= FULL_SEED);
        CopyCoins { base, k, tag, product }
    }

    fn size(&self) -> u128 {
        self.product.as_ref().map_or(FULL_SEED, MixedRadix::size)
    }

    fn split(&self, atom: u64) -> Vec<u64> {
        match &self.product {
            Some(r) => r.decode(atom as u128).into_iter().map(|d| d as u64).collect(),
            None => {
                let mut s: Stream = SharedKey::new(atom, self.tag).stream(0);
                (0..self.k).map(|_| s.below(self.base)).collect()
            }
        }
    }
}

pub struct KFold {
    base: Arc<dyn SmpProtocol>,
    k: usize,
    alice_radix: MixedRadix,
    bob_radix: MixedRadix,
    out_radix: MixedRadix,
    coins: [CopyCoins; 4],
}

impl KFold {
    pub fn new(base: Arc<dyn SmpProtocol>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(param("k must be at least 1"));
        }
        let (wa, wb) = (base.alice_width() as usize, base.bob_width() as usize);
        if k * wa > 64 || k * wb > 64 {
            return Err(param(format!(
                "{k} copies of {}-bit and {}-bit messages exceed 64 bits",
                wa, wb
            )));
        }
        let out_radix = MixedRadix::uniform(base.outputs() as u128, k)?;
        if out_radix.size() > MAX_OUTPUTS {
            return Err(param("product output alphabet too large"));
        }
        let c = base.coins();
        Ok(KFold {
            alice_radix: MixedRadix::uniform(base.alice_inputs(), k)?,
            bob_radix: MixedRadix::uniform(base.bob_inputs(), k)?,
            out_radix,
            coins: [
                CopyCoins::new(c.alice, k, domain::ALICE),
                CopyCoins::new(c.bob, k, domain::BOB),
                CopyCoins::new(c.public, k, domain::PUBLIC),
                CopyCoins::new(c.referee, k, domain::REFEREE),
            ],
            base,
            k,
        })
    }

    pub fn base(&self) -> &Arc<dyn SmpProtocol> {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alice_radix(&self) -> &MixedRadix {
        &self.alice_radix
    }

    pub fn bob_radix(&self) -> &MixedRadix {
        &self.bob_radix
    }

    /// Coordinate `j` of a product output.
    pub fn output_digit(&self, z: usize, j: usize) -> usize {
        self.out_radix.decode(z as u128)[j] as usize
    }

    fn chunks(&self, m: u64, w: u32) -> Vec<u64> {
        (0..self.k)
            .map(|j| low_bits(m >> (w as usize * (self.k - 1 - j)), w))
            .collect()
    }

    fn pack(&self, parts: impl Iterator<Item = u64>, w: u32) -> u64 {
        parts.fold(0u64, |acc, m| if w == 0 { acc } else { acc << w | m })
    }
}

impl SmpProtocol for KFold {
    fn name(&self) -> String {
        format!("{}^{}", self.base.name(), self.k)
    }
    fn model(&self) -> RandomnessModel {
        self.base.model()
    }
    fn alice_inputs(&self) -> u128 {
        self.alice_radix.size()
    }
    fn bob_inputs(&self) -> u128 {
        self.bob_radix.size()
    }
    fn outputs(&self) -> usize {
        self.out_radix.size() as usize
    }
    fn coins(&self) -> CoinSpace {
        CoinSpace {
            alice: self.coins[0].size(),
            bob: self.coins[1].size(),
            public: self.coins[2].size(),
            referee: self.coins[3].size(),
        }
    }
    fn alice_width(&self) -> u32 {
        self.base.alice_width() * self.k as u32
    }
    fn bob_width(&self) -> u32 {
        self.base.bob_width() * self.k as u32
    }
    fn alice_message(&self, x: u128, c: PlayerView) -> u64 {
        let own = self.coins[0].split(c.own);
        let public = self.coins[2].split(c.public);
        let parts = self.alice_radix.decode(x).into_iter().enumerate().map(|(j, xj)| {
            self.base.alice_message(
                xj,
                PlayerView {
                    own: own[j],
                    public: public[j],
                },
            )
        });
        self.pack(parts, self.base.alice_width())
    }
    fn bob_message(&self, y: u128, c: PlayerView) -> u64 {
        let own = self.coins[1].split(c.own);
        let public = self.coins[2].split(c.public);
        let parts = self.bob_radix.decode(y).into_iter().enumerate().map(|(j, yj)| {
            self.base.bob_message(
                yj,
                PlayerView {
                    own: own[j],
                    public: public[j],
                },
            )
        });
        self.pack(parts, self.base.bob_width())
    }
    fn referee(&self, a: u64, b: u64, c: RefereeView) -> usize {
        let ma = self.chunks(a, self.base.alice_width());
        let mb = self.chunks(b, self.base.bob_width());
        let alice = c.alice.map(|v| self.coins[0].split(v));
        let bob = c.bob.map(|v| self.coins[1].split(v));
        let public = self.coins[2].split(c.public);
        let own = self.coins[3].split(c.own);
        let digits: Vec<u128> = (0..self.k)
            .map(|j| {
                let view = RefereeView {
                    alice: alice.as_ref().map(|v| v[j]),
                    bob: bob.as_ref().map(|v| v[j]),
                    public: public[j],
                    own: own[j],
                };
                self.base.referee(ma[j], mb[j], view) as u128
            })
            .collect();
        self.out_radix.encode(&digits) as usize
    }
    fn promised(&self, x: u128, y: u128) -> bool {
        self.alice_radix
            .decode(x)
            .into_iter()
            .zip(self.bob_radix.decode(y))
            .all(|(xj, yj)| self.base.promised(xj, yj))
    }
}

pub struct KFoldRelation {
    base: Arc<dyn RelationSpec>,
    k: usize,
    alice_radix: MixedRadix,
    bob_radix: MixedRadix,
    out_radix: MixedRadix,
}

impl KFoldRelation {
    pub fn new(base: Arc<dyn RelationSpec>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(param("k must be at least 1"));
        }
        let out_radix = MixedRadix::uniform(base.outputs() as u128, k)?;
        if out_radix.size() > MAX_OUTPUTS {
            return Err(param("product output alphabet too large"));
        }
        Ok(KFoldRelation {
            alice_radix: MixedRadix::uniform(base.alice_inputs(), k)?,
            bob_radix: MixedRadix::uniform(base.bob_inputs(), k)?,
            out_radix,
            base,
            k,
        })
    }

    pub fn base(&self) -> &Arc<dyn RelationSpec> {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl RelationSpec for KFoldRelation {
    fn name(&self) -> String {
        format!("{}^{}", self.base.name(), self.k)
    }
    fn alice_inputs(&self) -> u128 {
        self.alice_radix.size()
    }
    fn bob_inputs(&self) -> u128 {
        self.bob_radix.size()
    }
    fn outputs(&self) -> usize {
        self.out_radix.size() as usize
    }
    fn holds(&self, x: u128, y: u128, z: usize) -> bool {
        let (xs, ys) = (self.alice_radix.decode(x), self.bob_radix.decode(y));
        let zs = self.out_radix.decode(z as u128);
        (0..self.k).all(|j| self.base.holds(xs[j], ys[j], zs[j] as usize))
    }
    fn promised(&self, x: u128, y: u128) -> bool {
        self.alice_radix
            .decode(x)
            .into_iter()
            .zip(self.bob_radix.decode(y))
            .all(|(xj, yj)| self.base.promised(xj, yj))
    }
    fn sample_promised(&self, stream: &mut Stream) -> Option<(u128, u128)> {
        let pairs = (0..self.k)
            .map(|_| self.base.sample_promised(stream))
            .collect::<Option<Vec<_>>>()?;
        let xs: Vec<u128> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<u128> = pairs.iter().map(|p| p.1).collect();
        Some((self.alice_radix.encode(&xs), self.bob_radix.encode(&ys)))
    }
}

/// Product protocol and product relation on `k` independent copies.
pub fn kfold(
    p: Arc<dyn SmpProtocol>,
    f: Arc<dyn RelationSpec>,
    k: usize,
) -> Result<(KFold, KFoldRelation)> {
    if p.alice_inputs() != f.alice_inputs()
        || p.bob_inputs() != f.bob_inputs()
        || p.outputs() != f.outputs()
    {
        return Err(param("protocol and relation disagree on sizes"));
    }
    Ok((KFold::new(p, k)?, KFoldRelation::new(f, k)?))
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn eq_pair(n: u32, t: u32, k: usize) -> (KFold, KFoldRelation) {
        kfold(
            Arc::new(EqualityFingerprint::new(n, t).unwrap()),
            Arc::new(EqualityRelation::new(n).unwrap()),
            k,
        )
        .unwrap()
    }

    #[test]
    fn single_copy_matches_base() {
        let base = EqualityFingerprint::new(3, 2).unwrap();
        let (p, _) = eq_pair(3, 2, 1);
        assert_eq!(p.coins(), base.coins());
        for x in 0..8 {
            for public in 0..64 {
                let v = PlayerView { own: 0, public };
                assert_eq!(p.alice_message(x, v), base.alice_message(x, v));
            }
        }
    }

    #[test]
    fn equal_pairs_give_all_ones() {
        let (p, f) = eq_pair(2, 3, 2);
        let p = Protocol::smp(p);
        for seed in 0..20 {
            // (1, 2) on both sides, output (1, 1) = 3.
            assert_eq!(run(&p, 6, 6, seed).unwrap().z, 3);
        }
        assert!(f.holds(6, 6, 3));
        assert!(!f.holds(6, 7, 3));
        assert_eq!(p.bits(), (6, 6));
    }

    #[test]
    fn two_copies_fail_at_most_twice_base_error() {
        let (p, f) = eq_pair(2, 3, 2);
        let r = measure_error(&Protocol::smp(p), &f, ErrorMode::Exhaustive, 0).unwrap();
        // Both copies unequal: 1 − (7/8)² = 15/64.
        assert_eq!(r.max_error, 15.0 / 64.0);
        assert!(r.max_error <= 2.0 / 8.0);
    }

    #[test]
    fn per_copy_marginal_error_is_base_error() {
        let (p, f) = eq_pair(2, 1, 2);
        let p = Protocol::smp(p);
        let space = p.coin_space();
        let total = space.total().unwrap();
        for x in 0..16u128 {
            for y in 0..16u128 {
                for j in 0..2 {
                    let xs = f.alice_radix.decode(x);
                    let ys = f.bob_radix.decode(y);
                    let wrong = (0..total)
                        .filter(|&i| {
                            let (_, _, z) = p.execute(x, y, &space.atom(i));
                            let zj = f.out_radix.decode(z as u128)[j] as usize;
                            !f.base().holds(xs[j], ys[j], zj)
                        })
                        .count();
                    assert!(wrong as f64 / total as f64 <= 0.5);
                }
            }
        }
    }

    #[test]
    fn seeded_copies_when_product_is_large() {
        let (p, _) = eq_pair(40, 1, 2);
        assert_eq!(p.coins().public, FULL_SEED);
        let c = &p.coins[2];
        assert_eq!(c.split(5), c.split(5));
        assert_eq!(c.split(5).len(), 2);
    }

    #[test]
    fn rejects_wide_products() {
        let base: Arc<dyn SmpProtocol> = Arc::new(EqualityFullDisclosure::new(32).unwrap());
        assert!(KFold::new(base.clone(), 3).is_err());
        assert!(KFold::new(base, 0).is_err());
    }
}
