use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{MemcapError, Result};
use crate::numerics::Dyadic;

/// Single-head attention with uniform weights. Only the product of the
/// output and value projections matters, so that product is stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformAttentionBlock {
    pub proj_value_product: Vec<Vec<Dyadic>>,
}

fn matvec(m: &[Vec<Dyadic>], v: &[BigRational]) -> Vec<BigRational> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold(BigRational::zero(), |acc, (w, x)| {
                if w.is_zero() {
                    acc
                } else {
                    acc + w.to_rational() * x
                }
            })
        })
        .collect()
}

fn check_columns(columns: &[Vec<BigRational>], dim: usize) -> Result<()> {
    if columns.is_empty() {
        return Err(MemcapError::DimensionMismatch { expected: 1, found: 0 });
    }
    match columns.iter().find(|c| c.len() != dim) {
        Some(c) => Err(MemcapError::DimensionMismatch { expected: dim, found: c.len() }),
        None => Ok(()),
    }
}

impl UniformAttentionBlock {
    pub fn dim(&self) -> usize {
        self.proj_value_product.len()
    }

    pub fn param_count(&self) -> u64 {
        (self.dim() * self.dim()) as u64
    }

    pub fn max_bit_complexity(&self) -> u64 {
        self.proj_value_product.iter().flatten().map(|d| d.bit_complexity()).max().unwrap_or(0)
    }

    /// `z_k + M * mean(z)` for every column.
    pub fn eval(&self, columns: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
        check_columns(columns, self.dim())?;
        let n = BigRational::from_integer(columns.len().into());
        let mut mean = vec![BigRational::zero(); self.dim()];
        for c in columns {
            for (m, v) in mean.iter_mut().zip(c) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= &n;
        }
        let shift = matvec(&self.proj_value_product, &mean);
        Ok(columns
            .iter()
            .map(|c| c.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardmaxHead {
    pub key: Vec<Vec<Dyadic>>,
    pub query: Vec<Vec<Dyadic>>,
    pub value: Vec<Vec<Dyadic>>,
    pub output: Vec<Vec<Dyadic>>,
}

/// Multi-head attention whose weights are the hardmax of the scores; tied
/// maxima share the weight equally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardmaxAttentionBlock {
    pub heads: Vec<HardmaxHead>,
}

/// Hardmax of a score column: `1/|I|` on the arg-max set `I`, zero elsewhere.
pub fn eval_hardmax_column(scores: &[BigRational]) -> Vec<BigRational> {
    let Some(best) = scores.iter().max() else {
        return Vec::new();
    };
    let ties = scores.iter().filter(|s| *s == best).count();
    let w = BigRational::new(1.into(), ties.into());
    scores
        .iter()
        .map(|s| if s == best { w.clone() } else { BigRational::zero() })
        .collect()
}

impl HardmaxAttentionBlock {
    pub fn dim(&self) -> usize {
        self.heads.first().map_or(0, |h| h.output.len())
    }

    pub fn param_count(&self) -> u64 {
        self.heads
            .iter()
            .map(|h| {
                [&h.key, &h.query, &h.value, &h.output]
                    .iter()
                    .map(|m| m.iter().map(|r| r.len() as u64).sum::<u64>())
                    .sum::<u64>()
            })
            .sum()
    }

    pub fn eval(&self, columns: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
        check_columns(columns, self.dim())?;
        let mut out: Vec<Vec<BigRational>> = columns.to_vec();
        for h in &self.heads {
            let keys: Vec<_> = columns.iter().map(|c| matvec(&h.key, c)).collect();
            let values: Vec<_> = columns.iter().map(|c| matvec(&h.value, c)).collect();
            for (k, c) in columns.iter().enumerate() {
                let q = matvec(&h.query, c);
                let scores: Vec<BigRational> = keys
                    .iter()
                    .map(|kv| kv.iter().zip(&q).fold(BigRational::zero(), |a, (x, y)| a + x * y))
                    .collect();
                let weights = eval_hardmax_column(&scores);
                let mut mixed = vec![BigRational::zero(); h.value.len()];
                for (w, v) in weights.iter().zip(&values) {
                    if !w.is_zero() {
                        for (m, x) in mixed.iter_mut().zip(v) {
                            *m += w * x;
                        }
                    }
                }
                for (o, add) in out[k].iter_mut().zip(matvec(&h.output, &mixed)) {
                    *o += add;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{rat, rat_int};

    #[test]
    fn hardmax_ties() {
        let w = eval_hardmax_column(&[rat_int(2), rat_int(2), rat_int(1)]);
        assert_eq!(w, vec![rat(1, 2), rat(1, 2), rat(0, 1)]);
    }

    #[test]
    fn uniform_block_adds_mean() {
        let mut m = vec![vec![Dyadic::zero(); 3]; 3];
        m[2][0] = Dyadic::one();
        let ua = UniformAttentionBlock { proj_value_product: m };
        let cols = vec![
            vec![rat_int(1), rat_int(5), rat_int(0)],
            vec![rat_int(4), rat_int(7), rat_int(0)],
        ];
        let out = ua.eval(&cols).unwrap();
        assert_eq!(out[0][2], rat(5, 2));
        assert_eq!(out[1][2], rat(5, 2));
        assert_eq!(out[1][1], rat_int(7));
    }

    #[test]
    fn hardmax_block_identity_scores() {
        let id = |n: usize| -> Vec<Vec<Dyadic>> {
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { Dyadic::one() } else { Dyadic::zero() }).collect())
                .collect()
        };
        let block = HardmaxAttentionBlock {
            heads: vec![HardmaxHead { key: id(1), query: id(1), value: id(1), output: id(1) }],
        };
        let out = block.eval(&[vec![rat_int(1)], vec![rat_int(3)]]).unwrap();
        // both columns attend to the largest key
        assert_eq!(out, vec![vec![rat_int(4)], vec![rat_int(6)]]);
    }
}
