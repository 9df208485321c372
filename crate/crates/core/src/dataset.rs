//! Datasets of labeled token sequences, the JSON dataset file format and
//! seeded generators.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{MemcapError, Result};
use crate::ir::Mode;
use crate::numerics::Dyadic;

/// A point in `Q^d` with dyadic coordinates, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Token(pub Vec<Dyadic>);

impl Token {
    pub fn from_ints(v: &[i64]) -> Token {
        Token(v.iter().map(|&x| Dyadic::from_int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_rational(&self) -> Vec<BigRational> {
        self.0.iter().map(|d| d.to_rational()).collect()
    }

    pub fn sq_norm(&self) -> BigRational {
        self.0.iter().map(|d| d.to_rational()).map(|q| &q * &q).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Labels {
    NextToken(Vec<u64>),
    Seq2seq(Vec<Vec<u64>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub d: usize,
    pub n: usize,
    pub sequences: Vec<Vec<Token>>,
    pub labels: Labels,
}

impl Dataset {
    pub fn new(d: usize, n: usize, sequences: Vec<Vec<Token>>, labels: Labels) -> Result<Dataset> {
        if sequences.is_empty() {
            return Err(MemcapError::Schema("dataset has no sequences".into()));
        }
        if n == 0 || d == 0 {
            return Err(MemcapError::Schema("d and n must be positive".into()));
        }
        for s in &sequences {
            if s.len() != n {
                return Err(MemcapError::DimensionMismatch { expected: n, found: s.len() });
            }
            if let Some(t) = s.iter().find(|t| t.dim() != d) {
                return Err(MemcapError::DimensionMismatch { expected: d, found: t.dim() });
            }
        }
        let all: Vec<u64> = match &labels {
            Labels::NextToken(l) => {
                if l.len() != sequences.len() {
                    return Err(MemcapError::DimensionMismatch { expected: sequences.len(), found: l.len() });
                }
                l.clone()
            }
            Labels::Seq2seq(l) => {
                if l.len() != sequences.len() {
                    return Err(MemcapError::DimensionMismatch { expected: sequences.len(), found: l.len() });
                }
                if let Some(r) = l.iter().find(|r| r.len() != n) {
                    return Err(MemcapError::DimensionMismatch { expected: n, found: r.len() });
                }
                l.iter().flatten().copied().collect()
            }
        };
        if all.contains(&0) {
            return Err(MemcapError::Schema("labels must lie in 1..=C".into()));
        }
        Ok(Dataset { d, n, sequences, labels })
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn mode(&self) -> Mode {
        match self.labels {
            Labels::NextToken(_) => Mode::NextToken,
            Labels::Seq2seq(_) => Mode::Seq2seq,
        }
    }

    /// Largest label.
    pub fn num_classes(&self) -> u64 {
        match &self.labels {
            Labels::NextToken(l) => l.iter().copied().max().unwrap_or(1),
            Labels::Seq2seq(l) => l.iter().flatten().copied().max().unwrap_or(1),
        }
    }

    /// Expected outputs per sequence: one value for next-token, `n` values
    /// for seq2seq.
    pub fn targets(&self, i: usize) -> Vec<u64> {
        match &self.labels {
            Labels::NextToken(l) => vec![l[i]],
            Labels::Seq2seq(l) => l[i].clone(),
        }
    }

    /// Distinct tokens in lexicographic order.
    pub fn vocabulary(&self) -> Vec<Token> {
        let set: BTreeSet<&Token> = self.sequences.iter().flatten().collect();
        set.into_iter().cloned().collect()
    }
}

/// Labeled multisets for the permutation-invariant variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetDataset {
    pub d: usize,
    pub sets: Vec<Vec<Token>>,
    pub labels: Vec<u64>,
}

impl SetDataset {
    pub fn new(d: usize, sets: Vec<Vec<Token>>, labels: Vec<u64>) -> Result<SetDataset> {
        if sets.is_empty() || sets.iter().any(|s| s.is_empty()) {
            return Err(MemcapError::Schema("every multiset needs at least one element".into()));
        }
        if sets.len() != labels.len() {
            return Err(MemcapError::DimensionMismatch { expected: sets.len(), found: labels.len() });
        }
        if let Some(t) = sets.iter().flatten().find(|t| t.dim() != d) {
            return Err(MemcapError::DimensionMismatch { expected: d, found: t.dim() });
        }
        if labels.contains(&0) {
            return Err(MemcapError::Schema("labels must lie in 1..=C".into()));
        }
        Ok(SetDataset { d, sets, labels })
    }

    pub fn max_size(&self) -> usize {
        self.sets.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn num_classes(&self) -> u64 {
        self.labels.iter().copied().max().unwrap_or(1)
    }
}

/// Sequences of token ids `1..=vocab` for the learned-embedding variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdDataset {
    pub vocab: usize,
    pub n: usize,
    pub sequences: Vec<Vec<usize>>,
    pub labels: Labels,
}

impl IdDataset {
    pub fn new(vocab: usize, sequences: Vec<Vec<usize>>, labels: Labels) -> Result<IdDataset> {
        let n = sequences.first().map_or(0, |s| s.len());
        if let Some(&bad) = sequences.iter().flatten().find(|&&i| i == 0 || i > vocab) {
            return Err(MemcapError::Range(format!("token id {bad} outside 1..={vocab}")));
        }
        // reuse the shape checks of the vector form
        let as_tokens = Self::lift(&sequences);
        Dataset::new(1, n, as_tokens, labels.clone())?;
        Ok(IdDataset { vocab, n, sequences, labels })
    }

    fn lift(sequences: &[Vec<usize>]) -> Vec<Vec<Token>> {
        sequences
            .iter()
            .map(|s| s.iter().map(|&i| Token::from_ints(&[i as i64])).collect())
            .collect()
    }

    /// The same data with each id viewed as a one-dimensional token.
    pub fn as_dataset(&self) -> Dataset {
        Dataset { d: 1, n: self.n, sequences: Self::lift(&self.sequences), labels: self.labels.clone() }
    }
}

/// On-disk dataset description. Token coordinates are decimal strings that
/// must denote dyadic rationals; for the embedding variant tokens are
/// integer ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetFile {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_sequences: usize,
    pub sequences: Vec<Vec<Value>>,
    pub labels: Vec<Value>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub num_classes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab: Option<usize>,
}

/// Parses a decimal string into an exact rational (`"0.1"` is allowed here).
pub fn parse_decimal_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let p: BigInt = a.trim().parse().map_err(|_| MemcapError::Parse(s.into()))?;
        let q: BigInt = b.trim().parse().map_err(|_| MemcapError::Parse(s.into()))?;
        if q.is_zero() {
            return Err(MemcapError::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if (ip.is_empty() && fp.is_empty()) || !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(MemcapError::Parse(format!("invalid decimal '{s}'")));
    }
    let digits = format!("{ip}{fp}");
    let m: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().unwrap() };
    let q = BigRational::new(if neg { -m } else { m }, num_traits::pow(BigInt::from(10), fp.len()));
    Ok(q)
}

fn parse_coord(v: &Value) -> Result<Dyadic> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(n) => n.to_string().parse(),
        _ => Err(MemcapError::Schema(format!("token coordinate must be a decimal string, got {v}"))),
    }
}

fn parse_label(v: &Value) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| MemcapError::Schema(format!("label must be a positive integer, got {v}")))
}

impl DatasetFile {
    pub fn load(path: &Path) -> Result<DatasetFile> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn labels_shape(&self) -> Result<Labels> {
        if self.labels.len() != self.n_sequences {
            return Err(MemcapError::Schema(format!(
                "N = {} but {} labels given",
                self.n_sequences,
                self.labels.len()
            )));
        }
        if self.labels.iter().all(|l| l.is_array()) {
            let rows = self
                .labels
                .iter()
                .map(|l| l.as_array().unwrap().iter().map(parse_label).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(Labels::Seq2seq(rows))
        } else {
            Ok(Labels::NextToken(self.labels.iter().map(parse_label).collect::<Result<_>>()?))
        }
    }

    fn check_counts(&self) -> Result<()> {
        if self.sequences.len() != self.n_sequences {
            return Err(MemcapError::Schema(format!(
                "N = {} but {} sequences given",
                self.n_sequences,
                self.sequences.len()
            )));
        }
        Ok(())
    }

    fn check_declared_classes(&self, observed: u64) -> Result<()> {
        if let Some(c) = self.num_classes {
            if observed > c {
                return Err(MemcapError::Schema(format!("label {observed} exceeds declared C = {c}")));
            }
        }
        Ok(())
    }

    fn token(&self, v: &Value) -> Result<Token> {
        let coords = v
            .as_array()
            .ok_or_else(|| MemcapError::Schema(format!("token must be an array, got {v}")))?;
        Ok(Token(coords.iter().map(parse_coord).collect::<Result<_>>()?))
    }

    pub fn to_dataset(&self) -> Result<Dataset> {
        self.check_counts()?;
        let sequences = self
            .sequences
            .iter()
            .map(|s| s.iter().map(|t| self.token(t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let ds = Dataset::new(self.d, self.n, sequences, self.labels_shape()?)?;
        self.check_declared_classes(ds.num_classes())?;
        Ok(ds)
    }

    pub fn to_set_dataset(&self) -> Result<SetDataset> {
        self.check_counts()?;
        let sets = self
            .sequences
            .iter()
            .map(|s| s.iter().map(|t| self.token(t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let labels = match self.labels_shape()? {
            Labels::NextToken(l) => l,
            Labels::Seq2seq(_) => return Err(MemcapError::Schema("multiset labels must be scalars".into())),
        };
        let ds = SetDataset::new(self.d, sets, labels)?;
        self.check_declared_classes(ds.num_classes())?;
        Ok(ds)
    }

    pub fn to_id_dataset(&self) -> Result<IdDataset> {
        self.check_counts()?;
        let sequences = self
            .sequences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| {
                        t.as_u64()
                            .map(|v| v as usize)
                            .ok_or_else(|| MemcapError::Schema(format!("token id must be a positive integer, got {t}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let vocab = self
            .vocab
            .unwrap_or_else(|| sequences.iter().flatten().copied().max().unwrap_or(1));
        let ds = IdDataset::new(vocab, sequences, self.labels_shape()?)?;
        if ds.n != self.n {
            return Err(MemcapError::DimensionMismatch { expected: self.n, found: ds.n });
        }
        Ok(ds)
    }

    pub fn declared_r(&self) -> Result<Option<BigRational>> {
        self.r.as_deref().map(parse_decimal_rational).transpose()
    }

    pub fn declared_delta(&self) -> Result<Option<BigRational>> {
        self.delta.as_deref().map(parse_decimal_rational).transpose()
    }

    pub fn from_dataset(ds: &Dataset) -> DatasetFile {
        let sequences = ds
            .sequences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| Value::Array(t.0.iter().map(|c| Value::String(c.to_decimal_string())).collect()))
                    .collect()
            })
            .collect();
        DatasetFile {
            d: ds.d,
            n: ds.n,
            n_sequences: ds.len(),
            sequences,
            labels: labels_to_json(&ds.labels),
            num_classes: None,
            r: None,
            delta: None,
            vocab: None,
        }
    }

    pub fn from_id_dataset(ds: &IdDataset) -> DatasetFile {
        DatasetFile {
            d: 1,
            n: ds.n,
            n_sequences: ds.sequences.len(),
            sequences: ds.sequences.iter().map(|s| s.iter().map(|&i| Value::from(i as u64)).collect()).collect(),
            labels: labels_to_json(&ds.labels),
            num_classes: None,
            r: None,
            delta: None,
            vocab: Some(ds.vocab),
        }
    }
}

fn labels_to_json(l: &Labels) -> Vec<Value> {
    match l {
        Labels::NextToken(l) => l.iter().map(|&v| Value::from(v)).collect(),
        Labels::Seq2seq(l) => l
            .iter()
            .map(|r| Value::Array(r.iter().map(|&v| Value::from(v)).collect()))
            .collect(),
    }
}

/// Distinct integer points of `[-radius, radius]^d`, shuffled.
fn grid_vocabulary(rng: &mut ChaCha8Rng, d: usize, size: usize, radius: i64) -> Vec<Token> {
    let mut seen = BTreeSet::new();
    let side = (2 * radius + 1) as u128;
    let capacity = side.checked_pow(d as u32).unwrap_or(u128::MAX);
    let size = size.min(capacity.min(usize::MAX as u128) as usize);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let t: Vec<i64> = (0..d).map(|_| rng.gen_range(-radius..=radius)).collect();
        if seen.insert(t.clone()) {
            out.push(Token::from_ints(&t));
        }
    }
    out
}

fn radius_for(d: usize, size: usize) -> i64 {
    let mut r = 2i64;
    while ((2 * r + 1) as f64).powi(d as i32) < 2.0 * size as f64 {
        r += 1;
    }
    r
}

fn multiset_key(s: &[Token]) -> Vec<Token> {
    let mut v = s.to_vec();
    v.sort();
    v
}

/// Random sequences over a vocabulary of `max(8, N)` integer grid points.
/// Labels are drawn per consistency key, so the result is always
/// consistent.
pub fn random_dataset(seed: u64, n_seq: usize, n: usize, d: usize, classes: u64, mode: Mode) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab_size = n_seq.max(8);
    let vocab = grid_vocabulary(&mut rng, d, vocab_size, radius_for(d, vocab_size));
    let sequences: Vec<Vec<Token>> = (0..n_seq)
        .map(|_| (0..n).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect())
        .collect();
    let mut table: BTreeMap<(Token, Vec<Token>), u64> = BTreeMap::new();
    let mut label_for = |rng: &mut ChaCha8Rng, t: &Token, ms: Vec<Token>| {
        *table.entry((t.clone(), ms)).or_insert_with(|| rng.gen_range(1..=classes))
    };
    let labels = match mode {
        Mode::NextToken => Labels::NextToken(
            sequences
                .iter()
                .map(|s| label_for(&mut rng, s.last().unwrap(), multiset_key(s)))
                .collect(),
        ),
        Mode::Seq2seq => Labels::Seq2seq(
            sequences
                .iter()
                .map(|s| {
                    let ms = multiset_key(s);
                    s.iter().map(|t| label_for(&mut rng, t, ms.clone())).collect()
                })
                .collect(),
        ),
    };
    Dataset::new(d, n, sequences, labels).expect("generator produces valid shapes")
}

/// `N` sequences whose `N * n` tokens are pairwise distinct, so every
/// labeling is consistent. Labels start at 1.
pub fn distinct_token_dataset(seed: u64, n_seq: usize, n: usize, d: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n_seq * n;
    let vocab = grid_vocabulary(&mut rng, d, total, radius_for(d, total));
    let sequences: Vec<Vec<Token>> = vocab.chunks(n).map(|c| c.to_vec()).collect();
    Dataset::new(d, n, sequences, Labels::NextToken(vec![1; n_seq])).expect("valid shapes")
}

/// Random multisets of sizes `1..=max_size` over an integer grid, with
/// duplicates removed.
pub fn random_set_dataset(seed: u64, count: usize, max_size: usize, d: usize, classes: u64) -> SetDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab_size = count.max(6);
    let vocab = grid_vocabulary(&mut rng, d, vocab_size, radius_for(d, vocab_size));
    let mut seen = BTreeSet::new();
    let mut sets = Vec::new();
    let mut guard = 0;
    while sets.len() < count && guard < 100 * count {
        guard += 1;
        let size = rng.gen_range(1..=max_size);
        let s: Vec<Token> = (0..size).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect();
        if seen.insert(multiset_key(&s)) {
            sets.push(s);
        }
    }
    let labels = sets.iter().map(|_| rng.gen_range(1..=classes)).collect();
    SetDataset::new(d, sets, labels).expect("valid shapes")
}

/// Random id sequences over `1..=vocab`, labels drawn per consistency key.
pub fn random_id_dataset(seed: u64, n_seq: usize, n: usize, vocab: usize, classes: u64, mode: Mode) -> IdDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sequences: Vec<Vec<usize>> = (0..n_seq)
        .map(|_| (0..n).map(|_| rng.gen_range(1..=vocab)).collect())
        .collect();
    let mut table: BTreeMap<(usize, Vec<usize>), u64> = BTreeMap::new();
    let mut label_for = |rng: &mut ChaCha8Rng, t: usize, s: &[usize]| {
        let mut ms = s.to_vec();
        ms.sort();
        *table.entry((t, ms)).or_insert_with(|| rng.gen_range(1..=classes))
    };
    let labels = match mode {
        Mode::NextToken => {
            Labels::NextToken(sequences.iter().map(|s| label_for(&mut rng, *s.last().unwrap(), s)).collect())
        }
        Mode::Seq2seq => Labels::Seq2seq(
            sequences
                .iter()
                .map(|s| s.iter().map(|&t| label_for(&mut rng, t, s)).collect())
                .collect(),
        ),
    };
    IdDataset::new(vocab, sequences, labels).expect("valid shapes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let ds = random_dataset(3, 5, 3, 2, 4, Mode::NextToken);
        let f = DatasetFile::from_dataset(&ds);
        let text = serde_json::to_string(&f).unwrap();
        let back: DatasetFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_dataset().unwrap(), ds);
    }

    #[test]
    fn rejects_non_dyadic_coordinates() {
        let text = r#"{"d":1,"n":1,"N":1,"sequences":[[["0.1"]]],"labels":[1]}"#;
        let f: DatasetFile = serde_json::from_str(text).unwrap();
        assert!(matches!(f.to_dataset(), Err(MemcapError::Parse(_))));
    }

    #[test]
    fn seq2seq_labels_by_shape() {
        let text = r#"{"d":1,"n":2,"N":1,"sequences":[[["1.5"],["2"]]],"labels":[[1,2]]}"#;
        let f: DatasetFile = serde_json::from_str(text).unwrap();
        let ds = f.to_dataset().unwrap();
        assert_eq!(ds.mode(), Mode::Seq2seq);
        assert_eq!(ds.num_classes(), 2);
    }

    #[test]
    fn decimal_rationals() {
        assert_eq!(parse_decimal_rational("0.1").unwrap(), BigRational::new(1.into(), 10.into()));
        assert_eq!(parse_decimal_rational("-2.5").unwrap(), BigRational::new((-5).into(), 2.into()));
        assert!(parse_decimal_rational("x").is_err());
    }

    #[test]
    fn distinct_tokens_are_distinct() {
        let ds = distinct_token_dataset(1, 8, 3, 2);
        assert_eq!(ds.vocabulary().len(), 24);
    }
}
