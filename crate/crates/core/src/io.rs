//! Loaders for distributions, channels and protocol/relation specs.
//!
//! Distribution CSV: one row per outcome, columns `index…, probability`;
//! an optional header row and `#` comments are allowed and missing outcomes
//! have probability 0. Channel CSV: one row per input, one column per
//! output. JSON: nested arrays of numbers. All parsers reject malformed
//! input with an error and never panic.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::probcore::{Distribution, JointDistribution, TripartiteDistribution};
use crate::smp::{
    EqualityFingerprint, EqualityFullDisclosure, EqualityRelation, FRelation, FSmp, HRelation,
    HSmp, Party, RelationSpec, SRelation, SmpProtocol, TableProtocol, TableRelation,
};

/// Largest number of cells in any loaded table.
pub const MAX_CELLS: usize = 1 << 20;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn records(text: &str) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(format!("csv: {e}")))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec.iter().map(str::to_owned).collect());
    }
    Ok(out)
}

fn numeric(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Drops the first record if it is a header (not all numeric).
fn strip_header(mut rows: Vec<Vec<String>>) -> Vec<Vec<String>> {
    if rows
        .first()
        .is_some_and(|r| r.iter().any(|f| numeric(f).is_none()))
    {
        rows.remove(0);
    }
    rows
}

/// `(dims, dense row-major probabilities)` from `index…, probability` rows.
fn indexed_csv(text: &str, arity: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let rows = strip_header(records(text)?);
    if rows.is_empty() {
        return Err(parse_err("no data rows"));
    }
    let mut entries = Vec::with_capacity(rows.len());
    let mut dims = vec![0usize; arity];
    for (line, row) in rows.iter().enumerate() {
        if row.len() != arity + 1 {
            return Err(parse_err(format!(
                "row {}: expected {} columns, got {}",
                line + 1,
                arity + 1,
                row.len()
            )));
        }
        let idx = row[..arity]
            .iter()
            .map(|f| f.parse::<usize>().ok().filter(|v| *v < MAX_CELLS))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| parse_err(format!("row {}: indices must be integers below {MAX_CELLS}", line + 1)))?;
        let p = numeric(&row[arity])
            .ok_or_else(|| parse_err(format!("row {}: probability is not a finite number", line + 1)))?;
        for (d, i) in dims.iter_mut().zip(&idx) {
            *d = (*d).max(i + 1);
        }
        entries.push((idx, p));
    }
    let cells = dims
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .filter(|c| *c <= MAX_CELLS)
        .ok_or_else(|| parse_err("table too large"))?;
    let mut probs = vec![0.0; cells];
    let mut seen = vec![false; cells];
    for (idx, p) in entries {
        let flat = idx.iter().zip(&dims).fold(0usize, |acc, (i, d)| acc * d + i);
        if std::mem::replace(&mut seen[flat], true) {
            return Err(parse_err(format!("duplicate outcome {idx:?}")));
        }
        probs[flat] = p;
    }
    Ok((dims, probs))
}

pub fn parse_distribution_csv(text: &str) -> Result<Distribution> {
    let (_, probs) = indexed_csv(text, 1)?;
    Distribution::new(probs)
}

pub fn parse_joint_csv(text: &str) -> Result<JointDistribution> {
    let (dims, probs) = indexed_csv(text, 2)?;
    JointDistribution::new(dims[0], dims[1], probs)
}

pub fn parse_tripartite_csv(text: &str) -> Result<TripartiteDistribution> {
    let (dims, probs) = indexed_csv(text, 3)?;
    TripartiteDistribution::new([dims[0], dims[1], dims[2]], probs)
}

fn json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("json: {e}")))
}

fn rectangular(rows: &[Vec<f64>]) -> Result<usize> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(parse_err("matrix must be non-empty and rectangular"));
    }
    if rows.len().saturating_mul(cols) > MAX_CELLS {
        return Err(parse_err("table too large"));
    }
    Ok(cols)
}

pub fn parse_distribution_json(text: &str) -> Result<Distribution> {
    let v: Vec<f64> = json(text)?;
    if v.len() > MAX_CELLS {
        return Err(parse_err("table too large"));
    }
    Distribution::new(v)
}

pub fn parse_joint_json(text: &str) -> Result<JointDistribution> {
    let rows: Vec<Vec<f64>> = json(text)?;
    rectangular(&rows)?;
    JointDistribution::from_rows(&rows)
}

pub fn parse_tripartite_json(text: &str) -> Result<TripartiteDistribution> {
    let cube: Vec<Vec<Vec<f64>>> = json(text)?;
    let b = cube.first().map_or(0, Vec::len);
    if b == 0 || cube.iter().any(|m| m.len() != b) {
        return Err(parse_err("array must be non-empty and rectangular"));
    }
    let flat: Vec<Vec<f64>> = cube.into_iter().flatten().collect();
    let c = rectangular(&flat)?;
    let a = flat.len() / b;
    TripartiteDistribution::new([a, b, c], flat.into_iter().flatten().collect())
}

pub fn parse_channel_csv(text: &str) -> Result<Channel> {
    let rows = strip_header(records(text)?);
    let matrix = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .map(|f| numeric(f))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| parse_err(format!("row {}: entries must be finite numbers", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    rectangular(&matrix)?;
    Channel::from_matrix(matrix)
}

pub fn parse_channel_json(text: &str) -> Result<Channel> {
    let rows: Vec<Vec<f64>> = json(text)?;
    rectangular(&rows)?;
    Channel::from_matrix(rows)
}

/// Single-instance protocol descriptions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolSpec {
    EqFull { n: u32 },
    EqFingerprint { n: u32, t: u32 },
    HSmp { n: u32, t: u32 },
    FSmp { n: u32, heavy: Party },
    Table(TableProtocol),
}

impl ProtocolSpec {
    pub fn build(&self) -> Result<Arc<dyn SmpProtocol>> {
        Ok(match self {
            ProtocolSpec::EqFull { n } => Arc::new(EqualityFullDisclosure::new(*n)?),
            ProtocolSpec::EqFingerprint { n, t } => Arc::new(EqualityFingerprint::new(*n, *t)?),
            ProtocolSpec::HSmp { n, t } => Arc::new(HSmp::new(*n, *t)?),
            ProtocolSpec::FSmp { n, heavy } => Arc::new(FSmp::new(*n, *heavy)?),
            ProtocolSpec::Table(t) => {
                t.validate()?;
                Arc::new(t.clone())
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationFile {
    Equality {
        n: u32,
    },
    H {
        n: u32,
        #[serde(default)]
        equal_promise: bool,
    },
    F {
        n: u32,
    },
    S {
        n: u32,
    },
    Table(TableRelation),
}

impl RelationFile {
    pub fn build(&self) -> Result<Arc<dyn RelationSpec>> {
        Ok(match self {
            RelationFile::Equality { n } => Arc::new(EqualityRelation::new(*n)?),
            RelationFile::H { n, equal_promise } => Arc::new(HRelation::new(*n, *equal_promise)?),
            RelationFile::F { n } => Arc::new(FRelation::new(*n)?),
            RelationFile::S { n } => Arc::new(SRelation::new(*n)?),
            RelationFile::Table(t) => {
                t.validate()?;
                Arc::new(t.clone())
            }
        })
    }
}

pub fn parse_protocol_spec(text: &str) -> Result<ProtocolSpec> {
    json(text)
}

pub fn parse_relation_spec(text: &str) -> Result<RelationFile> {
    json(text)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// JSON by `.json` extension, CSV otherwise.
pub fn read_distribution(path: &Path) -> Result<Distribution> {
    let text = read_text(path)?;
    if is_json(path) {
        parse_distribution_json(&text)
    } else {
        parse_distribution_csv(&text)
    }
}

pub fn read_channel(path: &Path) -> Result<Channel> {
    let text = read_text(path)?;
    if is_json(path) {
        parse_channel_json(&text)
    } else {
        parse_channel_csv(&text)
    }
}

pub fn read_protocol_spec(path: &Path) -> Result<ProtocolSpec> {
    parse_protocol_spec(&read_text(path)?)
}

pub fn read_relation_spec(path: &Path) -> Result<RelationFile> {
    parse_relation_spec(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_csv_with_header_and_gaps() {
        let d = parse_distribution_csv("x,p\n# comment\n0,0.25\n2,0.75\n").unwrap();
        assert_eq!(d.probs(), &[0.25, 0.0, 0.75]);
    }

    #[test]
    fn distribution_csv_errors() {
        assert!(parse_distribution_csv("").is_err());
        assert!(parse_distribution_csv("0,0.5\n0,0.5\n").is_err());
        assert!(parse_distribution_csv("0,0.5,1\n").is_err());
        assert!(parse_distribution_csv("-1,1\n").is_err());
        assert!(parse_distribution_csv("0,NaN\n").is_err());
        assert!(parse_distribution_csv("0,0.4\n").is_err());
        assert!(parse_distribution_csv("99999999999,1\n").is_err());
    }

    #[test]
    fn joint_and_tripartite() {
        let j = parse_joint_csv("0,0,0.5\n1,1,0.5\n").unwrap();
        assert_eq!((j.rows(), j.cols()), (2, 2));
        let j2 = parse_joint_json("[[0.5,0],[0,0.5]]").unwrap();
        assert_eq!(j, j2);
        let t = parse_tripartite_csv("0,0,0,0.5\n1,0,1,0.5\n").unwrap();
        assert_eq!(t.dims(), [2, 1, 2]);
        let t2 = parse_tripartite_json("[[[0.5,0]],[[0,0.5]]]").unwrap();
        assert_eq!(t, t2);
        assert!(parse_tripartite_json("[[[0.5]],[[0.25,0.25]]]").is_err());
    }

    #[test]
    fn channels() {
        let c = parse_channel_csv("0.9,0.1\n0.1,0.9\n").unwrap();
        assert_eq!(c, Channel::binary_symmetric(0.1).unwrap());
        assert_eq!(parse_channel_json("[[1,0],[0,1]]").unwrap(), Channel::identity(2).unwrap());
        assert!(parse_channel_csv("0.5,0.5\n1\n").is_err());
        assert!(parse_channel_json("[[]]").is_err());
        assert!(parse_channel_json("{").is_err());
    }

    #[test]
    fn specs() {
        let p = parse_protocol_spec(r#"{"kind":"eq_full","n":2}"#).unwrap();
        assert_eq!(p.build().unwrap().alice_width(), 2);
        let p = parse_protocol_spec(r#"{"kind":"f_smp","n":4,"heavy":"bob"}"#).unwrap();
        assert_eq!(p.build().unwrap().bob_width(), 4);
        assert!(parse_protocol_spec(r#"{"kind":"eq_full"}"#).is_err());
        assert!(parse_protocol_spec(r#"{"kind":"nope","n":2}"#).is_err());
        assert!(parse_protocol_spec(r#"{"kind":"eq_full","n":99}"#).unwrap().build().is_err());
        let r = parse_relation_spec(r#"{"kind":"h","n":4}"#).unwrap();
        assert_eq!(r, RelationFile::H { n: 4, equal_promise: false });
        assert_eq!(r.build().unwrap().outputs(), 2);
    }

    #[test]
    fn table_spec_round_trip() {
        let text = r#"{"kind":"table","model":"priv","alice_inputs":2,"bob_inputs":2,
            "outputs":2,"alice_width":1,"bob_width":1,
            "alice":[[0],[1]],"bob":[[0],[1]],
            "referee":[[[1],[0]],[[0],[1]]]}"#;
        let spec = parse_protocol_spec(text).unwrap();
        let p = spec.build().unwrap();
        assert_eq!(p.coins().referee, 1);
        let back = parse_protocol_spec(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
    }
}
