use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::Token;

/// A finite multiset of tokens, stored as sorted `(token, count)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset {
    counts: BTreeMap<Token, u64>,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, t: Token) {
        *self.counts.entry(t).or_insert(0) += 1;
    }

    pub fn count(&self, t: &Token) -> u64 {
        self.counts.get(t).copied().unwrap_or(0)
    }

    /// Total number of elements, with multiplicity.
    pub fn size(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = &Token> {
        self.counts.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Token, u64)> {
        self.counts.iter().map(|(t, c)| (t, *c))
    }

    /// Keeps only the tokens in `a`.
    pub fn restrict(&self, a: &BTreeSet<Token>) -> Multiset {
        Multiset {
            counts: self
                .counts
                .iter()
                .filter(|(t, _)| a.contains(*t))
                .map(|(t, c)| (t.clone(), *c))
                .collect(),
        }
    }
}

impl FromIterator<Token> for Multiset {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for t in iter {
            m.insert(t);
        }
        m
    }
}

pub fn sequence_to_multiset(seq: &[Token]) -> Multiset {
    seq.iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_free() {
        let a = Token::from_ints(&[1]);
        let b = Token::from_ints(&[2]);
        let m1 = sequence_to_multiset(&[a.clone(), b.clone(), a.clone()]);
        let m2 = sequence_to_multiset(&[b.clone(), a.clone(), a.clone()]);
        assert_eq!(m1, m2);
        assert_eq!(m1.count(&a), 2);
        assert_eq!(m1.size(), 3);
        let only_b: BTreeSet<Token> = [b.clone()].into_iter().collect();
        assert_eq!(m1.restrict(&only_b).size(), 1);
    }
}
