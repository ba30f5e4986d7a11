//! Protocols and relations given by explicit lookup tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{CoinSpace, PlayerView, RandomnessModel, RefereeView, RelationSpec, SmpProtocol};

/// Largest number of table cells accepted.
const MAX_CELLS: u128 = 1 << 22;
const MAX_WIDTH: u32 = 16;

fn schema(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn one() -> u64 {
    1
}

/// `alice[x][v]` is Alice's message on input `x` and view `v = public·A + own`.
/// `referee[ma][mb][v]` is the output on messages `ma`, `mb` and visible
/// coins `v`, enumerated with Alice's coins most significant, then Bob's,
/// then public, then the Referee's own (player coins count only when the
/// model lets the Referee see them).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableProtocol {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: RandomnessModel,
    pub alice_inputs: u64,
    pub bob_inputs: u64,
    pub outputs: u64,
    #[serde(default = "one")]
    pub alice_coins: u64,
    #[serde(default = "one")]
    pub bob_coins: u64,
    #[serde(default = "one")]
    pub public_coins: u64,
    #[serde(default = "one")]
    pub referee_coins: u64,
    pub alice_width: u32,
    pub bob_width: u32,
    pub alice: Vec<Vec<u64>>,
    pub bob: Vec<Vec<u64>>,
    pub referee: Vec<Vec<Vec<u64>>>,
}

fn default_name() -> String {
    "table".into()
}

fn checked_product(factors: &[u64]) -> Result<u128> {
    factors
        .iter()
        .try_fold(1u128, |acc, f| acc.checked_mul(*f as u128))
        .filter(|n| *n <= MAX_CELLS)
        .ok_or_else(|| schema("table too large"))
}

fn check_matrix(rows: &[Vec<u64>], n_rows: u64, n_cols: u128, limit: u64, what: &str) -> Result<()> {
    if rows.len() as u64 != n_rows {
        return Err(schema(format!("{what}: expected {n_rows} rows, got {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() as u128 != n_cols {
            return Err(schema(format!("{what}[{i}]: expected {n_cols} entries, got {}", row.len())));
        }
        if let Some(v) = row.iter().find(|v| **v >= limit) {
            return Err(schema(format!("{what}[{i}]: entry {v} out of range 0..{limit}")));
        }
    }
    Ok(())
}

impl TableProtocol {
    fn visible(&self) -> [u64; 4] {
        let shared = self.model != RandomnessModel::Priv;
        [
            if shared { self.alice_coins } else { 1 },
            if shared { self.bob_coins } else { 1 },
            self.public_coins,
            self.referee_coins,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.alice_inputs,
            self.bob_inputs,
            self.outputs,
            self.alice_coins,
            self.bob_coins,
            self.public_coins,
            self.referee_coins,
        ];
        if counts.contains(&0) {
            return Err(schema("sizes and coin counts must be positive"));
        }
        if self.public_coins != 1 && self.model != RandomnessModel::Pub {
            return Err(schema("public coins require the public-coin model"));
        }
        if self.alice_width > MAX_WIDTH || self.bob_width > MAX_WIDTH {
            return Err(schema(format!("table message widths are limited to {MAX_WIDTH}")));
        }
        let alice_views = checked_product(&[self.alice_coins, self.public_coins])?;
        let bob_views = checked_product(&[self.bob_coins, self.public_coins])?;
        let referee_views = checked_product(&self.visible())?;
        checked_product(&[self.alice_inputs, alice_views as u64])?;
        checked_product(&[self.bob_inputs, bob_views as u64])?;
        let (ma, mb) = (1u64 << self.alice_width, 1u64 << self.bob_width);
        checked_product(&[ma, mb, referee_views as u64])?;
        check_matrix(&self.alice, self.alice_inputs, alice_views, ma, "alice")?;
        check_matrix(&self.bob, self.bob_inputs, bob_views, mb, "bob")?;
        if self.referee.len() as u64 != ma {
            return Err(schema(format!("referee: expected {ma} rows, got {}", self.referee.len())));
        }
        for (a, block) in self.referee.iter().enumerate() {
            check_matrix(block, mb, referee_views, self.outputs, &format!("referee[{a}]"))?;
        }
        Ok(())
    }

    fn referee_view_index(&self, c: &RefereeView) -> usize {
        let [_, vb, vp, vr] = self.visible();
        let a = c.alice.unwrap_or(0);
        let b = c.bob.unwrap_or(0);
        (((a * vb + b) * vp + c.public) * vr + c.own) as usize
    }
}

impl SmpProtocol for TableProtocol {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn model(&self) -> RandomnessModel {
        self.model
    }
    fn alice_inputs(&self) -> u128 {
        self.alice_inputs as u128
    }
    fn bob_inputs(&self) -> u128 {
        self.bob_inputs as u128
    }
    fn outputs(&self) -> usize {
        self.outputs as usize
    }
    fn coins(&self) -> CoinSpace {
        CoinSpace {
            alice: self.alice_coins as u128,
            bob: self.bob_coins as u128,
            public: self.public_coins as u128,
            referee: self.referee_coins as u128,
        }
    }
    fn alice_width(&self) -> u32 {
        self.alice_width
    }
    fn bob_width(&self) -> u32 {
        self.bob_width
    }
    fn alice_message(&self, x: u128, c: PlayerView) -> u64 {
        self.alice[x as usize][(c.public * self.alice_coins + c.own) as usize]
    }
    fn bob_message(&self, y: u128, c: PlayerView) -> u64 {
        self.bob[y as usize][(c.public * self.bob_coins + c.own) as usize]
    }
    fn referee(&self, a: u64, b: u64, c: RefereeView) -> usize {
        self.referee[a as usize][b as usize][self.referee_view_index(&c)] as usize
    }
}

/// `valid[x][y]` lists the acceptable outputs; `promise[x][y]`, if given,
/// marks promised pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRelation {
    #[serde(default = "default_name")]
    pub name: String,
    pub alice_inputs: u64,
    pub bob_inputs: u64,
    pub outputs: u64,
    pub valid: Vec<Vec<Vec<u64>>>,
    #[serde(default)]
    pub promise: Option<Vec<Vec<bool>>>,
}

impl TableRelation {
    pub fn validate(&self) -> Result<()> {
        if self.alice_inputs == 0 || self.bob_inputs == 0 || self.outputs == 0 {
            return Err(schema("sizes must be positive"));
        }
        checked_product(&[self.alice_inputs, self.bob_inputs])?;
        if self.valid.len() as u64 != self.alice_inputs {
            return Err(schema("valid: wrong number of rows"));
        }
        if let Some(p) = &self.promise {
            if p.len() as u64 != self.alice_inputs || p.iter().any(|r| r.len() as u64 != self.bob_inputs) {
                return Err(schema("promise: shape does not match the inputs"));
            }
        }
        for (x, row) in self.valid.iter().enumerate() {
            if row.len() as u64 != self.bob_inputs {
                return Err(schema(format!("valid[{x}]: wrong number of columns")));
            }
            for (y, zs) in row.iter().enumerate() {
                if zs.iter().any(|z| *z >= self.outputs) {
                    return Err(schema(format!("valid[{x}][{y}]: output out of range")));
                }
                if zs.is_empty() && self.promised(x as u128, y as u128) {
                    return Err(schema(format!("promised input ({x}, {y}) has no valid output")));
                }
            }
        }
        Ok(())
    }
}

impl RelationSpec for TableRelation {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn alice_inputs(&self) -> u128 {
        self.alice_inputs as u128
    }
    fn bob_inputs(&self) -> u128 {
        self.bob_inputs as u128
    }
    fn outputs(&self) -> usize {
        self.outputs as usize
    }
    fn holds(&self, x: u128, y: u128, z: usize) -> bool {
        self.valid[x as usize][y as usize].contains(&(z as u64))
    }
    fn promised(&self, x: u128, y: u128) -> bool {
        self.promise
            .as_ref()
            .map_or(true, |p| p[x as usize][y as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn noisy_equality() -> TableProtocol {
        // Full disclosure of 1-bit inputs; the Referee flips its answer when
        // its 4-valued coin is 0.
        let referee = (0..2u64)
            .map(|a| {
                (0..2u64)
                    .map(|b| (0..4u64).map(|r| u64::from(a == b) ^ u64::from(r == 0)).collect())
                    .collect()
            })
            .collect();
        TableProtocol {
            name: "noisy".into(),
            model: RandomnessModel::Priv,
            alice_inputs: 2,
            bob_inputs: 2,
            outputs: 2,
            alice_coins: 1,
            bob_coins: 1,
            public_coins: 1,
            referee_coins: 4,
            alice_width: 1,
            bob_width: 1,
            alice: vec![vec![0], vec![1]],
            bob: vec![vec![0], vec![1]],
            referee,
        }
    }

    #[test]
    fn noisy_table_error() {
        let p = noisy_equality();
        p.validate().unwrap();
        let f = EqualityRelation::new(1).unwrap();
        let r = measure_error(&Protocol::smp(p), &f, ErrorMode::Exhaustive, 0).unwrap();
        assert_eq!(r.max_error, 0.25);
    }

    #[test]
    fn validation_catches_shape_errors() {
        let mut p = noisy_equality();
        p.alice.pop();
        assert!(p.validate().is_err());
        let mut p = noisy_equality();
        p.alice[0][0] = 2;
        assert!(p.validate().is_err());
        let mut p = noisy_equality();
        p.referee[1][1][3] = 5;
        assert!(p.validate().is_err());
        let mut p = noisy_equality();
        p.public_coins = 2;
        assert!(p.validate().is_err());
        let mut p = noisy_equality();
        p.referee_coins = u64::MAX;
        assert!(p.validate().is_err());
    }

    #[test]
    fn relation_round_trip() {
        let f = TableRelation {
            name: "xor".into(),
            alice_inputs: 2,
            bob_inputs: 2,
            outputs: 2,
            valid: vec![vec![vec![0], vec![1]], vec![vec![1], vec![]]],
            promise: Some(vec![vec![true, true], vec![true, false]]),
        };
        f.validate().unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let g: TableRelation = serde_json::from_str(&json).unwrap();
        assert_eq!(f, g);
        check_totality(&g).unwrap();
        let mut h = g.clone();
        h.promise = None;
        assert!(h.validate().is_err());
    }
}
