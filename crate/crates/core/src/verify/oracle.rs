//! A plain rational forward pass, written separately from the IR evaluator
//! so that audits do not rely on the code under test.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{MemcapError, Result};
use crate::ir::{Activation, AffineLayer, DeepSetModel, EmbeddingModel, Mode, ReluMLP, TransformerModel, UniformAttentionBlock};

fn layer(l: &AffineLayer, x: &[BigRational]) -> Result<Vec<BigRational>> {
    if x.len() != l.in_dim {
        return Err(MemcapError::DimensionMismatch { expected: l.in_dim, found: x.len() });
    }
    Ok(l.weights
        .iter()
        .zip(&l.bias)
        .map(|(row, b)| {
            let mut acc = b.to_rational();
            for (w, xi) in row.iter().zip(x) {
                if !w.is_zero() && !xi.is_zero() {
                    acc += w.to_rational() * xi;
                }
            }
            match l.activation {
                Activation::Relu if acc.is_negative() => BigRational::zero(),
                _ => acc,
            }
        })
        .collect())
}

pub fn forward(net: &ReluMLP, x: &[BigRational]) -> Result<Vec<BigRational>> {
    let mut cur = x.to_vec();
    for l in &net.layers {
        cur = layer(l, &cur)?;
    }
    Ok(cur)
}

fn attention(ua: &UniformAttentionBlock, cols: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let dim = ua.proj_value_product.len();
    let n = BigRational::from_integer(cols.len().into());
    let mean: Vec<BigRational> = (0..dim)
        .map(|c| cols.iter().map(|col| col[c].clone()).sum::<BigRational>() / &n)
        .collect();
    let shift: Vec<BigRational> = ua
        .proj_value_product
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(w, m)| w.to_rational() * m).sum())
        .collect();
    cols.iter().map(|c| c.iter().zip(&shift).map(|(a, b)| a + b).collect()).collect()
}

fn readout(mode: Mode, hidden: Vec<Vec<BigRational>>, ff2: &ReluMLP, e_out: &AffineLayer) -> Result<Vec<BigRational>> {
    let cols: Vec<Vec<BigRational>> = match mode {
        Mode::NextToken => hidden.into_iter().last().into_iter().collect(),
        Mode::Seq2seq => hidden,
    };
    cols.iter()
        .map(|h| {
            let y = layer(e_out, &forward(ff2, h)?)?;
            Ok(y[0].clone())
        })
        .collect()
}

/// First output channel at each read position.
pub fn transformer_outputs(m: &TransformerModel, seq: &[Vec<BigRational>]) -> Result<Vec<BigRational>> {
    if seq.is_empty() {
        return Err(MemcapError::DimensionMismatch { expected: 1, found: 0 });
    }
    let cols = seq
        .iter()
        .map(|t| forward(&m.ff1, &layer(&m.e_in, t)?))
        .collect::<Result<Vec<_>>>()?;
    readout(m.mode, attention(&m.ua, &cols), &m.ff2, &m.e_out)
}

/// Context ids (columns after attention) of every position.
pub fn transformer_contexts(m: &TransformerModel, seq: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let cols = seq
        .iter()
        .map(|t| forward(&m.ff1, &layer(&m.e_in, t)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(attention(&m.ua, &cols))
}

pub fn embedding_outputs(m: &EmbeddingModel, ids: &[usize]) -> Result<Vec<BigRational>> {
    let cols = ids
        .iter()
        .map(|&id| {
            if id == 0 || id > m.vocab() {
                return Err(MemcapError::Range(format!("token id {id} outside the table")));
            }
            Ok(m.embedding.iter().map(|row| row[id - 1].to_rational()).collect())
        })
        .collect::<Result<Vec<Vec<BigRational>>>>()?;
    readout(m.mode, attention(&m.ua, &cols), &m.ff2, &m.e_out)
}

pub fn deepset_output(m: &DeepSetModel, elems: &[Vec<BigRational>]) -> Result<BigRational> {
    let mut sum: Option<Vec<BigRational>> = None;
    for e in elems {
        let v = forward(&m.phi, e)?;
        sum = Some(match sum {
            None => v,
            Some(s) => s.iter().zip(&v).map(|(a, b)| a + b).collect(),
        });
    }
    let sum = sum.unwrap_or_else(|| vec![BigRational::zero(); m.phi.out_dim()]);
    Ok(forward(&m.rho, &sum)?[0].clone())
}
