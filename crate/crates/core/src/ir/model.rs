use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::attention::UniformAttentionBlock;
use super::mlp::{AffineLayer, ReluMLP};
use crate::error::{MemcapError, Result};
use crate::numerics::Dyadic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NextToken,
    Seq2seq,
}

/// `E_out ∘ FF2 ∘ UA ∘ FF1 ∘ E_in`. The feed-forward stacks act column-wise
/// without a residual; the attention block keeps its residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformerModel {
    pub e_in: AffineLayer,
    pub ff1: ReluMLP,
    pub ua: UniformAttentionBlock,
    pub ff2: ReluMLP,
    pub e_out: AffineLayer,
    pub mode: Mode,
}

fn to_rational(v: &[Dyadic]) -> Vec<BigRational> {
    v.iter().map(|d| d.to_rational()).collect()
}

fn affine_rational(l: &AffineLayer, x: &[BigRational]) -> Result<Vec<BigRational>> {
    ReluMLP { layers: vec![l.clone()] }.eval_rational(x)
}

/// Applies `f` to each distinct column once and returns outputs in order.
fn columnwise<K: Ord + Clone + Sync, V: Clone + Send>(
    cols: &[K],
    f: impl Fn(&K) -> Result<V> + Sync,
) -> Result<Vec<V>> {
    let distinct: Vec<K> = {
        let mut seen: BTreeMap<&K, ()> = BTreeMap::new();
        cols.iter().filter(|c| seen.insert(c, ()).is_none()).cloned().collect()
    };
    let outs: Vec<V> = distinct.par_iter().map(&f).collect::<Result<_>>()?;
    let table: BTreeMap<&K, &V> = distinct.iter().zip(outs.iter()).collect();
    Ok(cols.iter().map(|c| table[c].clone()).collect())
}

impl TransformerModel {
    /// Outputs per position (seq2seq) or a single output for the last
    /// position (next-token). Each output is the `E_out` vector.
    pub fn eval(&self, tokens: &[Vec<Dyadic>]) -> Result<Vec<Vec<BigRational>>> {
        let hidden = self.hidden_after_attention(tokens)?;
        let positions: Vec<&Vec<BigRational>> = match self.mode {
            Mode::NextToken => vec![hidden.last().expect("nonempty sequence")],
            Mode::Seq2seq => hidden.iter().collect(),
        };
        positions
            .into_iter()
            .map(|h| {
                let y = self.ff2.eval_rational(h)?;
                affine_rational(&self.e_out, &y)
            })
            .collect()
    }

    /// Columns after `E_in`, `FF1` and the attention block.
    pub fn hidden_after_attention(&self, tokens: &[Vec<Dyadic>]) -> Result<Vec<Vec<BigRational>>> {
        if tokens.is_empty() {
            return Err(MemcapError::DimensionMismatch { expected: 1, found: 0 });
        }
        let cols = columnwise(tokens, |t| {
            let e = self.e_in.eval(t)?;
            self.ff1.eval(&e)
        })?;
        let cols: Vec<Vec<BigRational>> = cols.iter().map(|c| to_rational(c)).collect();
        self.ua.eval(&cols)
    }

    pub fn width(&self) -> usize {
        self.ff1.width().max(self.ff2.width())
    }

    pub fn block_width(&self) -> usize {
        self.width().max(self.ua.dim())
    }

    pub fn depth(&self) -> usize {
        self.ff1.depth() + self.ff2.depth() + 1
    }

    pub fn param_count(&self) -> u64 {
        self.e_in.param_count()
            + self.ff1.param_count()
            + self.ua.param_count()
            + self.ff2.param_count()
            + self.e_out.param_count()
    }

    pub fn max_bit_complexity(&self) -> u64 {
        [
            self.e_in.max_bit_complexity(),
            self.ff1.max_bit_complexity(),
            self.ua.max_bit_complexity(),
            self.ff2.max_bit_complexity(),
            self.e_out.max_bit_complexity(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
    }
}

/// `rho(sum phi(x))` over the elements of a multiset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeepSetModel {
    pub phi: ReluMLP,
    pub rho: ReluMLP,
}

impl DeepSetModel {
    pub fn eval(&self, elements: &[Vec<Dyadic>]) -> Result<Vec<Dyadic>> {
        let mut sum = vec![Dyadic::zero(); self.phi.out_dim()];
        let outs = columnwise(elements, |x| self.phi.eval(x))?;
        for o in outs {
            for (s, v) in sum.iter_mut().zip(&o) {
                *s = &*s + v;
            }
        }
        self.rho.eval(&sum)
    }

    pub fn width(&self) -> usize {
        self.phi.width().max(self.rho.width())
    }

    pub fn depth(&self) -> usize {
        self.phi.depth() + self.rho.depth()
    }

    pub fn param_count(&self) -> u64 {
        self.phi.param_count() + self.rho.param_count()
    }

    pub fn max_bit_complexity(&self) -> u64 {
        self.phi.max_bit_complexity().max(self.rho.max_bit_complexity())
    }
}

/// Token ids `1..=vocab` are embedded by a learned `3 x vocab` table and
/// then pass through the attention block, `FF2` and `E_out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    pub embedding: Vec<Vec<Dyadic>>,
    pub ua: UniformAttentionBlock,
    pub ff2: ReluMLP,
    pub e_out: AffineLayer,
    pub mode: Mode,
}

impl EmbeddingModel {
    pub fn vocab(&self) -> usize {
        self.embedding.first().map_or(0, |r| r.len())
    }

    pub fn embed(&self, id: usize) -> Result<Vec<Dyadic>> {
        if id == 0 || id > self.vocab() {
            return Err(MemcapError::Range(format!("token id {id} outside 1..={}", self.vocab())));
        }
        Ok(self.embedding.iter().map(|row| row[id - 1].clone()).collect())
    }

    pub fn hidden_after_attention(&self, ids: &[usize]) -> Result<Vec<Vec<BigRational>>> {
        let cols: Vec<Vec<BigRational>> = ids
            .iter()
            .map(|&i| self.embed(i).map(|v| to_rational(&v)))
            .collect::<Result<_>>()?;
        self.ua.eval(&cols)
    }

    pub fn eval(&self, ids: &[usize]) -> Result<Vec<Vec<BigRational>>> {
        let hidden = self.hidden_after_attention(ids)?;
        let positions: Vec<&Vec<BigRational>> = match self.mode {
            Mode::NextToken => vec![hidden.last().expect("nonempty sequence")],
            Mode::Seq2seq => hidden.iter().collect(),
        };
        positions
            .into_iter()
            .map(|h| affine_rational(&self.e_out, &self.ff2.eval_rational(h)?))
            .collect()
    }

    pub fn embedding_params(&self) -> u64 {
        self.embedding.iter().map(|r| r.len() as u64).sum()
    }

    pub fn head_params(&self) -> u64 {
        self.ua.param_count() + self.ff2.param_count() + self.e_out.param_count()
    }

    pub fn param_count(&self) -> u64 {
        self.embedding_params() + self.head_params()
    }

    pub fn width(&self) -> usize {
        self.ff2.width().max(self.ua.dim())
    }

    pub fn depth(&self) -> usize {
        self.ff2.depth() + 1
    }

    pub fn max_bit_complexity(&self) -> u64 {
        let emb = self.embedding.iter().flatten().map(|d| d.bit_complexity()).max().unwrap_or(0);
        emb.max(self.ff2.max_bit_complexity())
            .max(self.ua.max_bit_complexity())
            .max(self.e_out.max_bit_complexity())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", rename_all = "snake_case")]
pub enum Model {
    Transformer(TransformerModel),
    DeepSet(DeepSetModel),
    Embedding(EmbeddingModel),
    Mlp(ReluMLP),
}

/// Width, depth, parameter count and max bit complexity of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accounting {
    pub width: usize,
    pub depth: usize,
    pub param_count: u64,
    pub max_bit_complexity: u64,
}

impl Model {
    pub fn accounting(&self) -> Accounting {
        match self {
            Model::Transformer(m) => Accounting {
                width: m.width(),
                depth: m.depth(),
                param_count: m.param_count(),
                max_bit_complexity: m.max_bit_complexity(),
            },
            Model::DeepSet(m) => Accounting {
                width: m.width(),
                depth: m.depth(),
                param_count: m.param_count(),
                max_bit_complexity: m.max_bit_complexity(),
            },
            Model::Embedding(m) => Accounting {
                width: m.width(),
                depth: m.depth(),
                param_count: m.param_count(),
                max_bit_complexity: m.max_bit_complexity(),
            },
            Model::Mlp(m) => Accounting {
                width: m.width(),
                depth: m.depth(),
                param_count: m.param_count(),
                max_bit_complexity: m.max_bit_complexity(),
            },
        }
    }
}
