//! Assembly of complete models: next-token and seq2seq transformers, the
//! limited-bit transformer, deep sets and the embedding-table variant.

pub mod context;
pub mod deepset;
pub mod embedding;
pub mod transformer;

use std::collections::BTreeMap;

use crate::ir::{Accounting, BoundLedger, ComponentReport, Mode, Model, SynthesisReport, WeightFile, WeightHeader};
use crate::numerics::CertifiedReal;
use crate::separation::SeparationParams;

pub use context::{build_attention, build_ff1, build_phi, context_ids, derive_seed, Ff1, PhiTilde};
pub use deepset::synthesize_deepset;
pub use embedding::synthesize_embedding;
pub use transformer::{synthesize_next_token, synthesize_next_token_limited_bits, synthesize_seq2seq, TransformerParts};

/// Variant tags used in reports, weight headers and on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    NextToken,
    Seq2seq,
    DeepSet,
    Embedding,
    LimitedBits,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::NextToken => "next-token",
            Variant::Seq2seq => "seq2seq",
            Variant::DeepSet => "deepset",
            Variant::Embedding => "embedding",
            Variant::LimitedBits => "limited-bits",
        }
    }

    pub fn from_tag(s: &str) -> Option<Variant> {
        [Variant::NextToken, Variant::Seq2seq, Variant::DeepSet, Variant::Embedding, Variant::LimitedBits]
            .into_iter()
            .find(|v| v.tag() == s)
    }

    /// Width stated for the variant's model.
    pub fn expected_width(self) -> usize {
        match self {
            Variant::NextToken | Variant::Seq2seq => 14,
            Variant::LimitedBits => 15,
            Variant::DeepSet | Variant::Embedding => 12,
        }
    }
}

/// A synthesized model with its report and ledger.
#[derive(Clone, Debug)]
pub struct Synthesis<M> {
    pub model: M,
    pub report: SynthesisReport,
    pub ledger: BoundLedger,
    pub params: SeparationParams,
    pub bits_budget: Option<u64>,
}

impl<M: Clone + Into<Model>> Synthesis<M> {
    pub fn weight_file(&self) -> WeightFile {
        let ledger: BTreeMap<String, String> =
            self.ledger.iter().map(|(k, v)| (k.clone(), v.interval_string(6))).collect();
        let header = WeightHeader {
            variant: self.report.variant.clone(),
            n_sequences: self.report.n_sequences,
            n: self.report.n,
            d: self.report.d,
            num_classes: self.report.num_classes,
            r: self.params.r().interval_string(6),
            delta: self.params.delta().interval_string(6),
            seed: self.report.seed,
            bits_budget: self.bits_budget,
            ledger,
        };
        WeightFile::new(header, self.model.clone().into())
    }
}

impl From<crate::ir::TransformerModel> for Model {
    fn from(m: crate::ir::TransformerModel) -> Model {
        Model::Transformer(m)
    }
}

impl From<crate::ir::DeepSetModel> for Model {
    fn from(m: crate::ir::DeepSetModel) -> Model {
        Model::DeepSet(m)
    }
}

impl From<crate::ir::EmbeddingModel> for Model {
    fn from(m: crate::ir::EmbeddingModel) -> Model {
        Model::Embedding(m)
    }
}

pub(crate) struct Shape {
    pub variant: Variant,
    pub mode: Option<Mode>,
    pub n_sequences: usize,
    pub n: usize,
    pub d: usize,
    pub num_classes: u64,
    pub seed: u64,
}

pub(crate) fn make_report(
    shape: Shape,
    acc: Accounting,
    block_width: usize,
    components: Vec<ComponentReport>,
    ledger: &BoundLedger,
) -> SynthesisReport {
    SynthesisReport {
        variant: shape.variant.tag().to_string(),
        mode: shape.mode,
        n_sequences: shape.n_sequences,
        n: shape.n,
        d: shape.d,
        num_classes: shape.num_classes,
        seed: shape.seed,
        width: acc.width,
        block_width,
        depth: acc.depth,
        param_count: acc.param_count,
        max_bit_complexity: acc.max_bit_complexity,
        components,
        bound_ledger: ledger.entries(),
    }
}

fn int(v: usize) -> CertifiedReal {
    CertifiedReal::from_int(v as i64)
}

/// Ledger quantities common to the transformer variants, with `N`
/// sequences of length `n` in dimension `d`.
pub(crate) fn transformer_ledger(params: &SeparationParams, n_seq: usize, n: usize, d: usize, classes: u64) -> BoundLedger {
    let mut l = BoundLedger::default();
    let (r, delta) = (params.r(), params.delta());
    let pi = CertifiedReal::pi();
    let nn = int(n_seq);
    let n3 = &(&nn * &nn) * &nn;
    let n5 = &(&n3 * &nn) * &nn;
    let len = int(n);
    l.insert("r", r.clone());
    l.insert("delta", delta.clone());
    l.insert("C", CertifiedReal::from_int(classes as i64));
    l.insert("C_phi", CertifiedReal::from_int(4) * n3.clone() * pi.sqrt());
    // 20 r n^2 N^3 sqrt(pi d) / delta
    let ctx = CertifiedReal::from_int(20) * r.clone() * (&len * &len) * n3 * (&pi * &int(d)).sqrt() / delta.clone();
    l.insert("R_context", ctx);
    // 400 sqrt(3d) n^3 r N^5 pi / delta
    let r2 = CertifiedReal::from_int(400)
        * int(3 * d).sqrt()
        * (&(&len * &len) * &len)
        * r
        * n5
        * pi
        / delta;
    l.insert("R2", r2);
    l
}

/// [`transformer_ledger`] for a sequence dataset.
pub fn dataset_ledger(params: &SeparationParams, ds: &crate::dataset::Dataset) -> BoundLedger {
    transformer_ledger(params, ds.len(), ds.n, ds.d, ds.num_classes())
}
