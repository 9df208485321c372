//! Next-token, seq2seq and limited-bit transformers.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::context::{build_attention, build_ff1, context_ids, derive_seed, distinct_multisets, Ff1, STREAM_FF2};
use super::{make_report, transformer_ledger, Shape, Synthesis, Variant};
use crate::dataset::Dataset;
use crate::error::{MemcapError, Result};
use crate::ffn::{max_bits_budget, memorizing_ffn, memorizing_ffn_limited_bits, MemorizingNet};
use crate::ir::{Activation, AffineLayer, ComponentReport, Mode, TransformerModel};
use crate::separation::{check_separated, consistency_groups, sequence_to_multiset};

/// Intermediate objects kept for inspection and auditing.
#[derive(Clone, Debug)]
pub struct TransformerParts {
    pub ff1: Ff1,
    pub ff2: MemorizingNet,
    /// Context id and label of each consistency group.
    pub contexts: Vec<(Vec<BigRational>, u64)>,
}

fn build(ds: &Dataset, budget: Option<usize>, seed: u64, variant: Variant) -> Result<(Synthesis<TransformerModel>, TransformerParts)> {
    if ds.is_empty() {
        return Err(MemcapError::Range("dataset has no sequences".into()));
    }
    let groups = consistency_groups(ds)?;
    let all_tokens: Vec<_> = ds.sequences.iter().flatten().cloned().collect();
    let params = check_separated(&all_tokens);
    let vocab = ds.vocabulary();
    let family = distinct_multisets(ds.sequences.iter().map(|s| sequence_to_multiset(s)));
    let ff1 = build_ff1(&vocab, &family, budget, seed)?;
    let ua = build_attention();

    let mut cache = BTreeMap::new();
    let mut per_seq: BTreeMap<usize, Vec<Vec<BigRational>>> = BTreeMap::new();
    let mut contexts = Vec::with_capacity(groups.len());
    for g in &groups {
        let (i, pos) = g.members[0];
        if let std::collections::btree_map::Entry::Vacant(e) = per_seq.entry(i) {
            e.insert(context_ids(&ff1.net, &ua, &ds.sequences[i], &mut cache)?);
        }
        contexts.push((per_seq[&i][pos].clone(), g.label));
    }
    let points: Vec<Vec<BigRational>> = contexts.iter().map(|c| c.0.clone()).collect();
    let labels: Vec<u64> = contexts.iter().map(|c| c.1).collect();
    let ff2_seed = derive_seed(seed, STREAM_FF2);
    let ff2 = match budget {
        None => memorizing_ffn(&points, &labels, &[], ff2_seed)?,
        Some(b) => memorizing_ffn_limited_bits(&points, &labels, &[], b.min(max_bits_budget(points.len())), ff2_seed)?,
    };

    let model = TransformerModel {
        e_in: AffineLayer::identity(ds.d, Activation::Identity),
        ff1: ff1.net.clone(),
        ua,
        ff2: ff2.net.clone(),
        e_out: AffineLayer::identity(1, Activation::Identity),
        mode: ds.mode(),
    };
    let mut components = vec![ComponentReport::of("ff1", &model.ff1)];
    components.extend(ff1.phi.net.components.iter().map(|c| prefixed("ff1.phi.", c)));
    components.push(ComponentReport::of("ff1.token_projection", &ff1.token.net));
    components.push(ComponentReport::of("ff2", &model.ff2));
    components.extend(ff2.components.iter().map(|c| prefixed("ff2.", c)));

    let mut ledger = transformer_ledger(&params, ds.len(), ds.n, ds.d, ds.num_classes());
    ledger.insert("R_token", ff1.token.range_bound.clone());
    ledger.insert("R_phi_embedding", ff1.phi.net.embedding.range_bound.clone());
    ledger.insert("R_ff2_embedding", ff2.embedding.range_bound.clone());
    if let Some(b) = budget {
        ledger.insert("B", crate::numerics::CertifiedReal::from_int(b as i64));
    }
    let acc = crate::ir::Model::Transformer(model.clone()).accounting();
    let report = make_report(
        Shape {
            variant,
            mode: Some(ds.mode()),
            n_sequences: ds.len(),
            n: ds.n,
            d: ds.d,
            num_classes: ds.num_classes(),
            seed,
        },
        acc,
        model.block_width(),
        components,
        &ledger,
    );
    let syn = Synthesis { model, report, ledger, params, bits_budget: budget.map(|b| b as u64) };
    Ok((syn, TransformerParts { ff1, ff2, contexts }))
}

pub(crate) fn prefixed(prefix: &str, c: &ComponentReport) -> ComponentReport {
    ComponentReport { name: format!("{prefix}{}", c.name), ..c.clone() }
}

fn require_mode(ds: &Dataset, mode: Mode) -> Result<()> {
    if ds.mode() != mode {
        return Err(MemcapError::Schema(format!("dataset labels are {:?}, expected {:?}", ds.mode(), mode)));
    }
    Ok(())
}

/// Width 14. Memorizes the label of each sequence at its last position.
pub fn synthesize_next_token(ds: &Dataset, seed: u64) -> Result<(Synthesis<TransformerModel>, TransformerParts)> {
    require_mode(ds, Mode::NextToken)?;
    build(ds, None, seed, Variant::NextToken)
}

/// Width 14. Memorizes a label at every position.
pub fn synthesize_seq2seq(ds: &Dataset, seed: u64) -> Result<(Synthesis<TransformerModel>, TransformerParts)> {
    require_mode(ds, Mode::Seq2seq)?;
    build(ds, None, seed, Variant::Seq2seq)
}

/// Width 15. Both feed-forward blocks use groups of at most `B^2` points;
/// `1 <= B <= ceil(sqrt(N))`. Either label layout is accepted.
pub fn synthesize_next_token_limited_bits(
    ds: &Dataset,
    budget: usize,
    seed: u64,
) -> Result<(Synthesis<TransformerModel>, TransformerParts)> {
    let top = max_bits_budget(ds.len());
    if budget == 0 || budget > top {
        return Err(MemcapError::Range(format!("bits budget {budget} outside 1..={top}")));
    }
    build(ds, Some(budget), seed, Variant::LimitedBits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{random_dataset, Labels, Token};
    use crate::numerics::rat_int;

    fn check(ds: &Dataset, model: &TransformerModel) {
        for (i, seq) in ds.sequences.iter().enumerate() {
            let toks: Vec<_> = seq.iter().map(|t| t.0.clone()).collect();
            let out = model.eval(&toks).unwrap();
            let want = ds.targets(i);
            let got: Vec<BigRational> = out.iter().map(|o| o[0].clone()).collect();
            assert_eq!(got, want.iter().map(|&y| rat_int(y)).collect::<Vec<_>>(), "sequence {i}");
        }
    }

    #[test]
    fn small_next_token() {
        let seqs = vec![
            vec![Token::from_ints(&[0, 0]), Token::from_ints(&[1, 0])],
            vec![Token::from_ints(&[1, 0]), Token::from_ints(&[0, 0])],
            vec![Token::from_ints(&[0, 1]), Token::from_ints(&[1, 0])],
        ];
        let ds = Dataset::new(2, 2, seqs, Labels::NextToken(vec![1, 2, 3])).unwrap();
        let (syn, _) = synthesize_next_token(&ds, 0).unwrap();
        check(&ds, &syn.model);
        assert_eq!(syn.report.width, 14);
    }

    #[test]
    fn permuted_duplicate_collapses() {
        let seqs = vec![
            vec![Token::from_ints(&[2]), Token::from_ints(&[1]), Token::from_ints(&[3])],
            vec![Token::from_ints(&[1]), Token::from_ints(&[2]), Token::from_ints(&[3])],
        ];
        let ds = Dataset::new(1, 3, seqs, Labels::NextToken(vec![4, 4])).unwrap();
        let (syn, parts) = synthesize_next_token(&ds, 1).unwrap();
        assert_eq!(parts.contexts.len(), 1);
        check(&ds, &syn.model);
    }

    #[test]
    fn seq2seq_and_limited() {
        let ds = random_dataset(5, 4, 3, 2, 3, Mode::Seq2seq);
        let (syn, _) = synthesize_seq2seq(&ds, 2).unwrap();
        check(&ds, &syn.model);
        let (lim, _) = synthesize_next_token_limited_bits(&ds, 1, 2).unwrap();
        check(&ds, &lim.model);
        assert_eq!(lim.report.width, 15);
        assert!(synthesize_next_token_limited_bits(&ds, 3, 2).is_err());
    }
}
