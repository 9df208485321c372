//! Exhaustive pairwise check of the contextual-mapping conditions.

use std::collections::BTreeMap;
use std::cmp::Ordering;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::oracle::transformer_contexts;
use crate::dataset::{Dataset, Token};
use crate::error::Result;
use crate::ir::{Mode, TransformerModel};
use crate::numerics::{rat_to_f64, CertifiedReal};
use crate::separation::{check_separated, sequence_to_multiset, sq_dist, Multiset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextCheck {
    pub ok: bool,
    /// Distinct keys have context ids at distance at least `1/n`.
    pub gap_ok: bool,
    /// Every context id has norm at most `20 r n^2 N^3 sqrt(pi d) / delta`.
    pub magnitude_ok: bool,
    /// Equal keys map to equal context ids.
    pub consistent: bool,
    pub keys: usize,
    pub min_distance: f64,
    pub max_norm: f64,
    pub bound: f64,
}

/// `20 r n^2 N^3 sqrt(pi d) / delta` for the dataset.
pub fn context_bound(ds: &Dataset) -> CertifiedReal {
    let tokens: Vec<Token> = ds.sequences.iter().flatten().cloned().collect();
    let params = check_separated(&tokens);
    let ledger = crate::synth::dataset_ledger(&params, ds);
    ledger.get("R_context").cloned().expect("ledger has R_context")
}

pub fn brute_force_context_check(model: &TransformerModel, ds: &Dataset) -> Result<ContextCheck> {
    let mut ids: BTreeMap<(Token, Multiset), Vec<BigRational>> = BTreeMap::new();
    let mut consistent = true;
    for seq in &ds.sequences {
        let cols: Vec<Vec<BigRational>> = seq.iter().map(|t| t.to_rational()).collect();
        let ctx = transformer_contexts(model, &cols)?;
        let ms = sequence_to_multiset(seq);
        let positions: Vec<usize> = match model.mode {
            Mode::NextToken => vec![seq.len() - 1],
            Mode::Seq2seq => (0..seq.len()).collect(),
        };
        for k in positions {
            let key = (seq[k].clone(), ms.clone());
            match ids.get(&key) {
                Some(prev) => consistent &= *prev == ctx[k],
                None => {
                    ids.insert(key, ctx[k].clone());
                }
            }
        }
    }
    let vals: Vec<&Vec<BigRational>> = ids.values().collect();
    let n = BigRational::from_integer(ds.n.max(1).into());
    let min_sq = BigRational::from_integer(1.into()) / (&n * &n);
    let mut smallest: Option<BigRational> = None;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let d = sq_dist(vals[i], vals[j]);
            if smallest.as_ref().is_none_or(|s| d < *s) {
                smallest = Some(d);
            }
        }
    }
    let gap_ok = smallest.as_ref().is_none_or(|s| *s >= min_sq);
    let max_sq = vals
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<BigRational>())
        .max()
        .unwrap_or_default();
    let bound = context_bound(ds);
    let norm = CertifiedReal::from_rational(max_sq.clone()).sqrt();
    let magnitude_ok = norm.cmp_real(&bound)? != Ordering::Greater;
    Ok(ContextCheck {
        ok: gap_ok && magnitude_ok && consistent,
        gap_ok,
        magnitude_ok,
        consistent,
        keys: vals.len(),
        min_distance: smallest.map_or(f64::INFINITY, |s| rat_to_f64(&s).sqrt()),
        max_norm: rat_to_f64(&max_sq).sqrt(),
        bound: bound.to_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::random_dataset;
    use crate::numerics::Dyadic;
    use crate::synth::synthesize_seq2seq;

    #[test]
    fn synthesized_passes_and_zeroed_phi_fails() {
        let ds = random_dataset(3, 5, 3, 2, 2, Mode::Seq2seq);
        let (syn, _) = synthesize_seq2seq(&ds, 4).unwrap();
        assert!(brute_force_context_check(&syn.model, &ds).unwrap().ok);
        let mut m = syn.model.clone();
        let last = m.ff1.layers.last_mut().unwrap();
        for w in last.weights[0].iter_mut() {
            *w = Dyadic::zero();
        }
        last.bias[0] = Dyadic::zero();
        assert!(!brute_force_context_check(&m, &ds).unwrap().gap_ok);
    }
}
