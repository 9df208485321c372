//! Integer weights `f` on a finite token set `S` whose weighted sums
//! `sum m(x) f(x)` tell a family of multisets apart.
//!
//! With `g` the lexicographic bijection `S -> 1..|S|`, a projection `v` of
//! the count vectors gives `h(x) = ceil(N^2 |S| sqrt(pi) v_g(x))` and
//! `f = h + floor(2 N^2 |S| sqrt(pi))`. The range and the pairwise gap and
//! magnitude of the sums are verified exactly; a failing draw is replaced.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::multiset::Multiset;
use super::projection::{find_projection_vector, pi_lower};
use crate::dataset::Token;
use crate::error::{MemcapError, Result};
use crate::numerics::CertifiedReal;

pub const REDRAWS: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatingFunction {
    /// `S` in lexicographic order.
    pub tokens: Vec<Token>,
    /// `f(tokens[i])`.
    pub values: Vec<BigInt>,
    /// Number of projection draws used.
    pub draws: u64,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    tokens: Vec<Vec<String>>,
    table: BTreeMap<usize, String>,
}

impl SeparatingFunction {
    pub fn value(&self, t: &Token) -> Option<&BigInt> {
        self.tokens.binary_search(t).ok().map(|i| &self.values[i])
    }

    /// `sum m(x) f(x)` over `x` in `S`.
    pub fn weighted_sum(&self, m: &Multiset) -> BigInt {
        self.tokens
            .iter()
            .zip(&self.values)
            .map(|(t, f)| f * BigInt::from(m.count(t)))
            .sum()
    }

    pub fn max_value(&self) -> BigInt {
        self.values.iter().max().cloned().unwrap_or_default()
    }

    /// JSON table keyed by token index.
    pub fn to_json(&self) -> String {
        let repr = TableRepr {
            tokens: self
                .tokens
                .iter()
                .map(|t| t.0.iter().map(|c| c.to_decimal_string()).collect())
                .collect(),
            table: self.values.iter().enumerate().map(|(i, v)| (i, v.to_string())).collect(),
        };
        serde_json::to_string(&repr).expect("table serializes")
    }
}

/// `N^2 |S| sqrt(pi)` as a certified real.
fn base_scale(n: usize, s: usize) -> CertifiedReal {
    CertifiedReal::from_int((n * n * s) as i64) * CertifiedReal::pi().sqrt()
}

/// Upper end of the value range, `ceil(4 N^2 |S| sqrt(pi))`.
pub fn range_top(n: usize, s: usize) -> Result<BigInt> {
    (CertifiedReal::from_int(4) * base_scale(n, s)).certified_ceil()
}

/// Exact check of the range, gap and magnitude properties.
pub fn verify_separating(f: &SeparatingFunction, multisets: &[Multiset], max_size: u64) -> Result<bool> {
    let n = multisets.len();
    let s = f.tokens.len();
    if s == 0 {
        return Ok(n <= 1);
    }
    let top = range_top(n, s)?;
    if f.values.iter().any(|v| *v < BigInt::from(1) || *v > top) {
        return Ok(false);
    }
    let sums: Vec<BigInt> = multisets.iter().map(|m| f.weighted_sum(m)).collect();
    let s_big = BigInt::from(s);
    for i in 0..n {
        for j in i + 1..n {
            let d = &sums[i] - &sums[j];
            if &d * &d < s_big {
                return Ok(false);
            }
        }
    }
    // |sum| <= 4 M N^2 |S| sqrt(pi)  <=  sum^2 <= 16 M^2 N^4 |S|^2 pi_lo
    let m = BigInt::from(max_size.max(1));
    let nn = BigInt::from(n);
    let bound = BigRational::from_integer(BigInt::from(16) * &m * &m * nn.pow(4) * &s_big * &s_big) * pi_lower();
    Ok(sums
        .iter()
        .all(|x| BigRational::from_integer(x * x) <= bound))
}

/// Builds `f` on `support` for the given multisets. Multisets are compared
/// through their restriction to `support` and must stay distinct there.
pub fn separating_function(multisets: &[Multiset], support: &BTreeSet<Token>, seed: u64) -> Result<SeparatingFunction> {
    let tokens: Vec<Token> = support.iter().cloned().collect();
    let restricted: Vec<Multiset> = multisets.iter().map(|m| m.restrict(support)).collect();
    {
        let mut seen = BTreeMap::new();
        for (j, m) in restricted.iter().enumerate() {
            if let Some(i) = seen.insert(m, j) {
                return Err(MemcapError::NotDistinct { first: i, second: j });
            }
        }
    }
    let n = restricted.len();
    let s = tokens.len();
    if s == 0 {
        return Ok(SeparatingFunction { tokens, values: Vec::new(), draws: 0 });
    }
    let max_size = restricted.iter().map(|m| m.size()).max().unwrap_or(1);
    let points: Vec<Vec<BigRational>> = restricted
        .iter()
        .map(|m| tokens.iter().map(|t| BigRational::from_integer(m.count(t).into())).collect())
        .collect();
    let scale = base_scale(n, s);
    let offset = (CertifiedReal::from_int(2) * scale.clone()).certified_floor()?;
    for draw in 0..REDRAWS {
        let proj = find_projection_vector(&points, seed.wrapping_add(draw.wrapping_mul(0x9E37_79B9)))?;
        let values = proj
            .v
            .iter()
            .map(|vg| {
                let h = (&scale * &CertifiedReal::from_dyadic(vg)).certified_ceil()?;
                Ok(h + &offset)
            })
            .collect::<Result<Vec<BigInt>>>()?;
        let f = SeparatingFunction { tokens: tokens.clone(), values, draws: draw + 1 };
        if verify_separating(&f, &restricted, max_size)? {
            return Ok(f);
        }
    }
    Err(MemcapError::SearchExhausted { attempts: REDRAWS as usize })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::{restriction_set, sequence_to_multiset};

    fn ms(v: &[i64]) -> Multiset {
        sequence_to_multiset(&v.iter().map(|&x| Token::from_ints(&[x])).collect::<Vec<_>>())
    }

    #[test]
    fn separates_family() {
        let family = vec![ms(&[1, 2, 2]), ms(&[1, 3, 3]), ms(&[2, 3, 1]), ms(&[1, 1, 1]), ms(&[4, 4, 2])];
        let a = restriction_set(&family).unwrap();
        let f = separating_function(&family, &a, 11).unwrap();
        let restricted: Vec<Multiset> = family.iter().map(|m| m.restrict(&a)).collect();
        assert!(verify_separating(&f, &restricted, 3).unwrap());
        assert!(f.values.iter().all(|v| *v >= BigInt::from(1)));
    }

    #[test]
    fn table_json_is_keyed_by_index() {
        let family = vec![ms(&[1]), ms(&[2])];
        let a = restriction_set(&family).unwrap();
        let f = separating_function(&family, &a, 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        assert!(v["table"]["0"].is_string());
    }
}
