//! Token features shared by every variant: the multiset-separating map
//! `phi`, the token projection `F`, the first feed-forward block and the
//! uniform attention that turns them into context ids.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Token;
use crate::error::{MemcapError, Result};
use crate::ffn::{max_bits_budget, memorizing_ffn, memorizing_ffn_limited_bits, project_net, MemorizingNet, ScalarEmbedding};
use crate::ir::{parallel_shared_input, ReluMLP, UniformAttentionBlock};
use crate::numerics::{BigInt, Dyadic};
use crate::separation::{check_separated, restriction_set, separating_function, Multiset, SeparatingFunction};

/// Independent seed for a named construction step.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

pub(crate) const STREAM_PHI_TABLE: u64 = 1;
pub(crate) const STREAM_PHI_NET: u64 = 2;
pub(crate) const STREAM_TOKEN: u64 = 3;
pub(crate) const STREAM_FF2: u64 = 4;

/// `phi`: separating values on the restriction set `A`, exactly 0 on the
/// rest of the vocabulary.
#[derive(Clone, Debug)]
pub struct PhiTilde {
    pub net: MemorizingNet,
    pub table: SeparatingFunction,
    /// `A` was empty (a single distinct multiset) and was padded with the
    /// smallest token at value 1.
    pub padded: bool,
}

impl PhiTilde {
    pub fn value(&self, t: &Token) -> BigInt {
        self.table.value(t).cloned().unwrap_or_default()
    }
}

/// Distinct multisets in order of first appearance.
pub fn distinct_multisets(ms: impl IntoIterator<Item = Multiset>) -> Vec<Multiset> {
    let mut seen = BTreeSet::new();
    ms.into_iter().filter(|m| seen.insert(m.clone())).collect()
}

/// Builds `phi` over `vocab` (sorted, distinct) for a family of distinct
/// multisets. With a bits budget the limited-bit network is used, with the
/// budget clamped to what the memorized point count allows.
pub fn build_phi(vocab: &[Token], family: &[Multiset], budget: Option<usize>, seed: u64) -> Result<PhiTilde> {
    let a = restriction_set(family)?;
    let (table, padded) = if a.is_empty() {
        let t = vocab.first().cloned().ok_or_else(|| MemcapError::Range("empty vocabulary".into()))?;
        (SeparatingFunction { tokens: vec![t], values: vec![BigInt::from(1)], draws: 0 }, true)
    } else {
        (separating_function(family, &a, derive_seed(seed, STREAM_PHI_TABLE))?, false)
    };
    let points: Vec<Vec<BigRational>> = table.tokens.iter().map(|t| t.to_rational()).collect();
    let labels = table
        .values
        .iter()
        .map(|v| u64::try_from(v.clone()).map_err(|_| MemcapError::Range(format!("separating value {v} too large"))))
        .collect::<Result<Vec<u64>>>()?;
    let tail: Vec<Vec<BigRational>> = vocab
        .iter()
        .filter(|t| table.value(t).is_none())
        .map(|t| t.to_rational())
        .collect();
    let net_seed = derive_seed(seed, STREAM_PHI_NET);
    let net = match budget {
        None => memorizing_ffn(&points, &labels, &tail, net_seed)?,
        Some(b) => memorizing_ffn_limited_bits(&points, &labels, &tail, b.min(max_bits_budget(points.len())), net_seed)?,
    };
    Ok(PhiTilde { net, table, padded })
}

/// `x -> (phi(x), F(x), 0)`, with `F` run alongside the first layers of
/// `phi` and padded to its depth.
#[derive(Clone, Debug)]
pub struct Ff1 {
    pub net: ReluMLP,
    pub phi: PhiTilde,
    pub token: ScalarEmbedding,
}

pub fn build_ff1(vocab: &[Token], family: &[Multiset], budget: Option<usize>, seed: u64) -> Result<Ff1> {
    let phi = build_phi(vocab, family, budget, seed)?;
    let points: Vec<Vec<BigRational>> = vocab.iter().map(|t| t.to_rational()).collect();
    let token = project_net(&points, &check_separated(vocab), derive_seed(seed, STREAM_TOKEN))?;
    let phi_net = &phi.net.net;
    let f = token.net.padded_to(phi_net.depth(), &phi_net.activations());
    let net = parallel_shared_input(phi_net, &f)?.with_zero_channel();
    Ok(Ff1 { net, phi, token })
}

/// `z_k + e3 e1^T mean(z)`: the third channel receives the mean of `phi`.
pub fn build_attention() -> UniformAttentionBlock {
    let mut m = vec![vec![Dyadic::zero(); 3]; 3];
    m[2][0] = Dyadic::one();
    UniformAttentionBlock { proj_value_product: m }
}

/// Context ids of every position of `seq`, computed through the actual
/// first block and attention.
pub fn context_ids(
    ff1: &ReluMLP,
    ua: &UniformAttentionBlock,
    seq: &[Token],
    cache: &mut BTreeMap<Token, Vec<BigRational>>,
) -> Result<Vec<Vec<BigRational>>> {
    let mut cols = Vec::with_capacity(seq.len());
    for t in seq {
        if !cache.contains_key(t) {
            let out = ff1.eval(&t.0)?;
            cache.insert(t.clone(), out.iter().map(|d| d.to_rational()).collect());
        }
        cols.push(cache[t].clone());
    }
    ua.eval(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::sequence_to_multiset;

    fn toks(v: &[i64]) -> Vec<Token> {
        v.iter().map(|&x| Token::from_ints(&[x])).collect()
    }

    #[test]
    fn phi_is_zero_off_restriction_set() {
        let seqs = [toks(&[1, 2]), toks(&[1, 3]), toks(&[2, 3])];
        let family: Vec<Multiset> = seqs.iter().map(|s| sequence_to_multiset(s)).collect();
        let vocab = toks(&[1, 2, 3]);
        let ff1 = build_ff1(&vocab, &family, None, 9).unwrap();
        for t in &vocab {
            let out = ff1.net.eval(&t.0).unwrap();
            assert_eq!(out[0].to_rational(), BigRational::from_integer(ff1.phi.value(t)));
            assert!(out[2].is_zero());
        }
        assert_eq!(ff1.net.width(), 14);
    }

    #[test]
    fn attention_adds_mean_to_third_channel() {
        let ua = build_attention();
        let cols = vec![
            vec![BigRational::from_integer(4.into()), BigRational::from_integer(1.into()), BigRational::from_integer(0.into())],
            vec![BigRational::from_integer(2.into()), BigRational::from_integer(5.into()), BigRational::from_integer(0.into())],
        ];
        let out = ua.eval(&cols).unwrap();
        assert_eq!(out[0][2], BigRational::from_integer(3.into()));
        assert_eq!(out[1][..2], cols[1][..2]);
    }

    #[test]
    fn seeds_differ_by_stream() {
        assert_ne!(derive_seed(1, STREAM_PHI_NET), derive_seed(1, STREAM_TOKEN));
        assert_eq!(derive_seed(1, STREAM_FF2), derive_seed(1, STREAM_FF2));
    }
}
