//! Token ids embedded by a `3 x vocab` lookup table with columns
//! `(f(x), x, 0)` on the restriction set and `(0, x, 0)` elsewhere.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::context::{build_attention, derive_seed, distinct_multisets, STREAM_FF2, STREAM_PHI_TABLE};
use super::transformer::prefixed;
use super::{make_report, transformer_ledger, Shape, Synthesis, Variant};
use crate::dataset::{IdDataset, Token};
use crate::error::{MemcapError, Result};
use crate::ffn::memorizing_ffn;
use crate::ir::{Activation, AffineLayer, ComponentReport, EmbeddingModel, Model};
use crate::numerics::{BigInt, Dyadic};
use crate::separation::{consistency_groups, restriction_set, separating_function, sequence_to_multiset, SeparatingFunction};

pub fn synthesize_embedding(ds: &IdDataset, seed: u64) -> Result<Synthesis<EmbeddingModel>> {
    let flat = ds.as_dataset();
    if flat.is_empty() {
        return Err(MemcapError::Range("dataset has no sequences".into()));
    }
    let groups = consistency_groups(&flat)?;
    let family = distinct_multisets(flat.sequences.iter().map(|s| sequence_to_multiset(s)));
    let a = restriction_set(&family)?;
    let table = if a.is_empty() {
        SeparatingFunction { tokens: vec![flat.vocabulary()[0].clone()], values: vec![BigInt::from(1)], draws: 0 }
    } else {
        separating_function(&family, &a, derive_seed(seed, STREAM_PHI_TABLE))?
    };

    let mut embedding = vec![vec![Dyadic::zero(); ds.vocab]; 3];
    for id in 1..=ds.vocab {
        let t = Token::from_ints(&[id as i64]);
        if let Some(f) = table.value(&t) {
            embedding[0][id - 1] = Dyadic::from_int(f.clone());
        }
        embedding[1][id - 1] = Dyadic::from_int(id as i64);
    }
    let mut model = EmbeddingModel {
        embedding,
        ua: build_attention(),
        ff2: crate::ir::ReluMLP { layers: Vec::new() },
        e_out: AffineLayer::identity(1, Activation::Identity),
        mode: flat.mode(),
    };

    let mut per_seq: BTreeMap<usize, Vec<Vec<BigRational>>> = BTreeMap::new();
    let mut points = Vec::with_capacity(groups.len());
    let mut labels = Vec::with_capacity(groups.len());
    for g in &groups {
        let (i, pos) = g.members[0];
        if let std::collections::btree_map::Entry::Vacant(e) = per_seq.entry(i) {
            e.insert(model.hidden_after_attention(&ds.sequences[i])?);
        }
        points.push(per_seq[&i][pos].clone());
        labels.push(g.label);
    }
    let ff2 = memorizing_ffn(&points, &labels, &[], derive_seed(seed, STREAM_FF2))?;
    model.ff2 = ff2.net.clone();

    let mut components = vec![ComponentReport::of("ff2", &model.ff2)];
    components.extend(ff2.components.iter().map(|c| prefixed("ff2.", c)));
    let params = crate::separation::check_separated(&flat.vocabulary());
    let mut ledger = transformer_ledger(&params, flat.len(), flat.n, 1, flat.num_classes());
    ledger.insert("R_ff2_embedding", ff2.embedding.range_bound.clone());
    ledger.insert("vocab", crate::numerics::CertifiedReal::from_int(ds.vocab as i64));
    let acc = Model::Embedding(model.clone()).accounting();
    let report = make_report(
        Shape {
            variant: Variant::Embedding,
            mode: Some(flat.mode()),
            n_sequences: flat.len(),
            n: flat.n,
            d: 1,
            num_classes: flat.num_classes(),
            seed,
        },
        acc,
        acc.width,
        components,
        &ledger,
    );
    Ok(Synthesis { model, report, ledger, params, bits_budget: None })
}
