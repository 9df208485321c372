//! Deep sets `rho(sum phi(x))` memorizing labeled multisets.

use std::collections::BTreeSet;

use num_rational::BigRational;

use super::context::{build_phi, derive_seed, STREAM_FF2};
use super::transformer::prefixed;
use super::{make_report, Shape, Synthesis, Variant};
use crate::dataset::{SetDataset, Token};
use crate::error::{MemcapError, Result};
use crate::ffn::memorizing_ffn;
use crate::ir::{BoundLedger, ComponentReport, DeepSetModel, Model};
use crate::numerics::CertifiedReal;
use crate::separation::{check_separated, sequence_to_multiset, Multiset};

/// Width 12. Multisets must be pairwise distinct.
pub fn synthesize_deepset(ds: &SetDataset, seed: u64) -> Result<Synthesis<DeepSetModel>> {
    if ds.sets.is_empty() {
        return Err(MemcapError::Range("no multisets to memorize".into()));
    }
    let family: Vec<Multiset> = ds.sets.iter().map(|s| sequence_to_multiset(s)).collect();
    let vocab: Vec<Token> = ds.sets.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let params = check_separated(&vocab);
    let phi = build_phi(&vocab, &family, None, seed)?;
    let sums: Vec<Vec<BigRational>> = family
        .iter()
        .map(|m| vec![BigRational::from_integer(phi.table.weighted_sum(m))])
        .collect();
    let rho = memorizing_ffn(&sums, &ds.labels, &[], derive_seed(seed, STREAM_FF2))?;
    let model = DeepSetModel { phi: phi.net.net.clone(), rho: rho.net.clone() };

    let mut components = vec![ComponentReport::of("phi", &model.phi)];
    components.extend(phi.net.components.iter().map(|c| prefixed("phi.", c)));
    components.push(ComponentReport::of("rho", &model.rho));
    components.extend(rho.components.iter().map(|c| prefixed("rho.", c)));

    let n = ds.sets.len();
    let m = ds.max_size().max(1);
    let pi = CertifiedReal::pi();
    let nn = CertifiedReal::from_int(n as i64);
    let n3 = &(&nn * &nn) * &nn;
    let mut ledger = BoundLedger::default();
    ledger.insert("r", params.r());
    ledger.insert("delta", params.delta());
    ledger.insert("C", CertifiedReal::from_int(ds.num_classes() as i64));
    ledger.insert("C_phi", CertifiedReal::from_int(4) * n3.clone() * pi.sqrt());
    // sums are (4 M N^3 sqrt(pi), 1)-separated; R for rho is 20 * 4MN^3 sqrt(pi) * N^2 * sqrt(pi)
    let n5 = &(&n3 * &nn) * &nn;
    ledger.insert("R2", CertifiedReal::from_int(80 * m as i64) * n5 * pi);
    ledger.insert("R_phi_embedding", phi.net.embedding.range_bound.clone());
    ledger.insert("R_rho_embedding", rho.embedding.range_bound.clone());

    let acc = Model::DeepSet(model.clone()).accounting();
    let report = make_report(
        Shape {
            variant: Variant::DeepSet,
            mode: None,
            n_sequences: n,
            n: m,
            d: ds.d,
            num_classes: ds.num_classes(),
            seed,
        },
        acc,
        acc.width,
        components,
        &ledger,
    );
    Ok(Synthesis { model, report, ledger, params, bits_budget: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::random_set_dataset;
    use crate::numerics::Dyadic;

    #[test]
    fn memorizes_and_ignores_order() {
        let ds = random_set_dataset(4, 5, 4, 2, 3);
        let syn = synthesize_deepset(&ds, 7).unwrap();
        for (set, &y) in ds.sets.iter().zip(&ds.labels) {
            let mut elems: Vec<Vec<Dyadic>> = set.iter().map(|t| t.0.clone()).collect();
            assert_eq!(syn.model.eval(&elems).unwrap()[0], Dyadic::from_int(y));
            elems.reverse();
            assert_eq!(syn.model.eval(&elems).unwrap()[0], Dyadic::from_int(y));
        }
        assert_eq!(syn.report.width, 12);
    }

    #[test]
    fn duplicate_multisets_rejected() {
        let t = |v: i64| Token::from_ints(&[v]);
        let ds = SetDataset::new(1, vec![vec![t(1), t(2)], vec![t(2), t(1)]], vec![1, 1]).unwrap();
        assert!(matches!(synthesize_deepset(&ds, 0), Err(MemcapError::NotDistinct { .. })));
    }
}
