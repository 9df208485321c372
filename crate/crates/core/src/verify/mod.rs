//! Audits of synthesized models: exact memorization through an independent
//! evaluator, bound checks, context-id checks and sweeps.

pub mod bounds;
pub mod context;
pub mod oracle;
pub mod sweep;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, IdDataset, SetDataset};
use crate::error::{MemcapError, Result};
use crate::ir::Model;
use crate::numerics::rat_int;

pub use bounds::{report_from_weights, verify_bounds, BoundCheck};
pub use context::{brute_force_context_check, ContextCheck};
pub use sweep::{fit_slope, scaling_sweep, shatter_sweep, write_csv, ShatterSummary, SweepRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub memorization_ok: bool,
    /// `output - label` per labeled position, as exact rationals.
    pub per_input_residuals: Vec<String>,
    pub bound_checks: Vec<BoundCheck>,
    /// First input index with a nonzero residual.
    pub counterexample: Option<usize>,
}

impl VerificationReport {
    pub fn bounds_ok(&self) -> bool {
        self.bound_checks.iter().all(|b| b.pass)
    }

    pub fn ok(&self) -> bool {
        self.memorization_ok && self.bounds_ok()
    }
}

/// Labeled inputs in the form the model expects.
#[derive(Clone, Debug)]
pub enum Inputs<'a> {
    Sequences(&'a Dataset),
    Sets(&'a SetDataset),
    Ids(&'a IdDataset),
}

impl Inputs<'_> {
    pub fn len(&self) -> usize {
        match self {
            Inputs::Sequences(d) => d.len(),
            Inputs::Sets(d) => d.sets.len(),
            Inputs::Ids(d) => d.sequences.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn rational_seq(seq: &[crate::dataset::Token]) -> Vec<Vec<BigRational>> {
    seq.iter().map(|t| t.to_rational()).collect()
}

/// Residuals of input `i`.
fn residuals(model: &Model, inputs: &Inputs, i: usize) -> Result<Vec<BigRational>> {
    let (outs, targets): (Vec<BigRational>, Vec<u64>) = match (model, inputs) {
        (Model::Transformer(m), Inputs::Sequences(ds)) => {
            if ds.d != m.e_in.in_dim {
                return Err(MemcapError::DimensionMismatch { expected: m.e_in.in_dim, found: ds.d });
            }
            if ds.mode() != m.mode {
                return Err(MemcapError::Schema("dataset label layout does not match the model".into()));
            }
            (oracle::transformer_outputs(m, &rational_seq(&ds.sequences[i]))?, ds.targets(i))
        }
        (Model::Embedding(m), Inputs::Ids(ds)) => {
            let flat = ds.as_dataset();
            if flat.mode() != m.mode {
                return Err(MemcapError::Schema("dataset label layout does not match the model".into()));
            }
            (oracle::embedding_outputs(m, &ds.sequences[i])?, flat.targets(i))
        }
        (Model::DeepSet(m), Inputs::Sets(ds)) => {
            if ds.d != m.phi.in_dim() {
                return Err(MemcapError::DimensionMismatch { expected: m.phi.in_dim(), found: ds.d });
            }
            (vec![oracle::deepset_output(m, &rational_seq(&ds.sets[i]))?], vec![ds.labels[i]])
        }
        _ => return Err(MemcapError::Schema("model kind does not match the dataset".into())),
    };
    if outs.len() != targets.len() {
        return Err(MemcapError::DimensionMismatch { expected: targets.len(), found: outs.len() });
    }
    Ok(outs.iter().zip(&targets).map(|(o, &y)| o - rat_int(y)).collect())
}

/// Exact comparison of every labeled output; zero tolerance. Shape errors
/// are returned, wrong outputs are reported.
pub fn verify_memorization(model: &Model, inputs: &Inputs) -> Result<VerificationReport> {
    let per_input = (0..inputs.len())
        .into_par_iter()
        .map(|i| residuals(model, inputs, i))
        .collect::<Result<Vec<_>>>()?;
    let counterexample = per_input.iter().position(|r| r.iter().any(|v| !v.is_zero()));
    Ok(VerificationReport {
        memorization_ok: counterexample.is_none(),
        per_input_residuals: per_input.iter().flatten().map(|v| v.to_string()).collect(),
        bound_checks: Vec::new(),
        counterexample,
    })
}
