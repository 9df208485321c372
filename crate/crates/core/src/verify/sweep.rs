//! Shatter sweeps over all binary labelings and parameter-scaling sweeps.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{verify_memorization, Inputs};
use crate::dataset::{random_dataset, random_id_dataset, random_set_dataset, Dataset, Labels};
use crate::error::{MemcapError, Result};
use crate::ffn::max_bits_budget;
use crate::ir::{Accounting, Mode, Model};
use crate::synth::{
    derive_seed, synthesize_deepset, synthesize_embedding, synthesize_next_token, synthesize_next_token_limited_bits,
    synthesize_seq2seq, Variant,
};

/// Extra attempts with fresh seeds after a failed projection search.
pub const RETRIES: u64 = 3;
const STREAM_RETRY: u64 = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n_value: usize,
    pub labeling_index: u64,
    pub seed: u64,
    pub params: u64,
    pub depth: usize,
    pub width: usize,
    pub max_bits: u64,
    pub ok: bool,
    /// `ok`, `memorization_failed`, `retry_exhausted` or `error`.
    pub status: String,
}

fn failed_row(n_value: usize, labeling_index: u64, seed: u64, status: &str) -> SweepRow {
    SweepRow {
        n_value,
        labeling_index,
        seed,
        params: 0,
        depth: 0,
        width: 0,
        max_bits: 0,
        ok: false,
        status: status.into(),
    }
}

fn synth_once(variant: Variant, inputs: &Inputs, budget: Option<usize>, seed: u64) -> Result<Model> {
    Ok(match (variant, inputs) {
        (Variant::NextToken, Inputs::Sequences(ds)) => synthesize_next_token(ds, seed)?.0.model.into(),
        (Variant::Seq2seq, Inputs::Sequences(ds)) => synthesize_seq2seq(ds, seed)?.0.model.into(),
        (Variant::LimitedBits, Inputs::Sequences(ds)) => {
            let b = budget.unwrap_or(1).clamp(1, max_bits_budget(ds.len()));
            synthesize_next_token_limited_bits(ds, b, seed)?.0.model.into()
        }
        (Variant::DeepSet, Inputs::Sets(ds)) => synthesize_deepset(ds, seed)?.model.into(),
        (Variant::Embedding, Inputs::Ids(ds)) => synthesize_embedding(ds, seed)?.model.into(),
        _ => return Err(MemcapError::Schema("variant does not match the inputs".into())),
    })
}

/// Synthesizes and verifies one instance, retrying exhausted searches with
/// derived seeds.
fn run_row(variant: Variant, inputs: &Inputs, budget: Option<usize>, seed: u64, n_value: usize, index: u64) -> SweepRow {
    let mut attempt_seed = seed;
    for attempt in 0..=RETRIES {
        match synth_once(variant, inputs, budget, attempt_seed) {
            Ok(model) => {
                let Accounting { width, depth, param_count, max_bit_complexity } = model.accounting();
                let ok = verify_memorization(&model, inputs).map(|r| r.memorization_ok).unwrap_or(false);
                return SweepRow {
                    n_value,
                    labeling_index: index,
                    seed,
                    params: param_count,
                    depth,
                    width,
                    max_bits: max_bit_complexity,
                    ok,
                    status: if ok { "ok" } else { "memorization_failed" }.into(),
                };
            }
            Err(MemcapError::SearchExhausted { .. }) => {
                attempt_seed = derive_seed(seed, STREAM_RETRY + attempt);
            }
            Err(_) => return failed_row(n_value, index, seed, "error"),
        }
    }
    failed_row(n_value, index, seed, "retry_exhausted")
}

/// One row per `(N, seed)`, ordered by grid position then seed.
pub fn scaling_sweep(
    grid: &[usize],
    n: usize,
    d: usize,
    classes: u64,
    seeds: &[u64],
    variant: Variant,
    budget: Option<usize>,
) -> Vec<SweepRow> {
    let jobs: Vec<(usize, usize, u64)> = grid
        .iter()
        .flat_map(|&nv| seeds.iter().enumerate().map(move |(i, &s)| (nv, i, s)))
        .collect();
    jobs.par_iter()
        .map(|&(nv, i, s)| {
            let mode = if variant == Variant::Seq2seq { Mode::Seq2seq } else { Mode::NextToken };
            match variant {
                Variant::DeepSet => {
                    let ds = random_set_dataset(s, nv, n, d, classes);
                    run_row(variant, &Inputs::Sets(&ds), budget, s, nv, i as u64)
                }
                Variant::Embedding => {
                    let ds = random_id_dataset(s, nv, n, 2 * nv.max(4), classes, mode);
                    run_row(variant, &Inputs::Ids(&ds), budget, s, nv, i as u64)
                }
                _ => {
                    let ds = random_dataset(s, nv, n, d, classes, mode);
                    run_row(variant, &Inputs::Sequences(&ds), budget, s, nv, i as u64)
                }
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShatterSummary {
    #[serde(rename = "N")]
    pub n_value: usize,
    pub total: u64,
    pub succeeded: u64,
    pub max_params: u64,
    pub rows: Vec<SweepRow>,
}

pub const MAX_SHATTER_N: usize = 12;

/// Every binary labeling of the fixed inputs, with `{0, 1}` encoded as
/// classes `{1, 2}`. In seq2seq mode a sequence's label is repeated at
/// every position.
pub fn shatter_sweep(inputs: &Dataset, mode: Mode, seed: u64) -> Result<ShatterSummary> {
    let count = inputs.len();
    if count > MAX_SHATTER_N {
        return Err(MemcapError::Range(format!("{count} sequences, at most {MAX_SHATTER_N} can be enumerated")));
    }
    let total = 1u64 << count;
    let variant = if mode == Mode::Seq2seq { Variant::Seq2seq } else { Variant::NextToken };
    let rows: Vec<SweepRow> = (0..total)
        .into_par_iter()
        .map(|l| {
            let bits: Vec<u64> = (0..count).map(|i| 1 + ((l >> i) & 1)).collect();
            let labels = match mode {
                Mode::NextToken => Labels::NextToken(bits),
                Mode::Seq2seq => Labels::Seq2seq(bits.iter().map(|&b| vec![b; inputs.n]).collect()),
            };
            match Dataset::new(inputs.d, inputs.n, inputs.sequences.clone(), labels) {
                Ok(ds) => run_row(variant, &Inputs::Sequences(&ds), None, seed, count, l),
                Err(_) => failed_row(count, l, seed, "error"),
            }
        })
        .collect();
    Ok(ShatterSummary {
        n_value: count,
        total,
        succeeded: rows.iter().filter(|r| r.ok).count() as u64,
        max_params: rows.iter().map(|r| r.params).max().unwrap_or(0),
        rows,
    })
}

/// Least-squares slope of `log2 y` against `log2 x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.log2(), y.log2())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| MemcapError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::distinct_token_dataset;

    #[test]
    fn slope_of_square_root() {
        let pts: Vec<(f64, f64)> = [4.0f64, 16.0, 64.0].iter().map(|&x| (x, 3.0 * x.sqrt())).collect();
        assert!((fit_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shatter_three() {
        let ds = distinct_token_dataset(0, 3, 2, 2);
        let s = shatter_sweep(&ds, Mode::NextToken, 1).unwrap();
        assert_eq!((s.total, s.succeeded), (8, 8));
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_csv(&[failed_row(4, 0, 1, "retry_exhausted")], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("N,labeling_index,seed,params,depth,width,max_bits,ok,status\n"));
        assert!(text.contains("retry_exhausted"));
    }

    #[test]
    fn grid_rows_in_order() {
        let rows = scaling_sweep(&[2, 3], 2, 2, 2, &[5, 6], Variant::NextToken, None);
        let keys: Vec<(usize, u64)> = rows.iter().map(|r| (r.n_value, r.labeling_index)).collect();
        assert_eq!(keys, vec![(2, 0), (2, 1), (3, 0), (3, 1)]);
        assert!(rows.iter().all(|r| r.ok));
    }
}
