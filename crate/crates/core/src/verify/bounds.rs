//! Width equalities and frozen-constant depth and bit-complexity bounds.
//!
//! With `L = max(log2 R2, log2 C_phi, log2 C)`:
//! - depth `<= c_depth (sqrt(N lg N) + sqrt(N / lg N) L)`,
//! - bits `<= c_bits (log2 d + sqrt(N / lg N) L)`,
//!
//! and for a bits budget `B`:
//! - depth `<= c_depth' (N sqrt(lg B) / B + N L / (B sqrt(lg B)))`,
//! - bits `<= c_bits' (log2 d + B L / sqrt(lg B))`,
//!
//! where `lg x = log2 max(x, 2)`. For seq2seq `N` counts positions.
//! The constants are frozen from the reference suite and mirrored in the
//! crate manifest under `package.metadata.bounds`.

use serde::{Deserialize, Serialize};

use crate::ir::{LedgerEntry, Model, SynthesisReport, WeightFile};
use crate::synth::Variant;

pub const DEPTH_CONSTANT: f64 = 8.0;
pub const BITS_CONSTANT: f64 = 2.0;
pub const LIMITED_DEPTH_CONSTANT: f64 = 6.0;
pub const LIMITED_BITS_CONSTANT: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub measured: f64,
    /// Constant times formula for inequalities; the stated value for
    /// equalities.
    pub formula_value: f64,
    pub pass: bool,
}

fn lg(x: f64) -> f64 {
    x.max(2.0).log2()
}

/// `L = max(log2 R2, log2 C_phi, log2 C, 1)` from the report ledger.
pub fn log_scale(report: &SynthesisReport) -> f64 {
    ["R2", "C_phi", "C"]
        .iter()
        .filter_map(|k| report.ledger_value(k))
        .map(|v| v.max(1.0).log2())
        .fold(1.0, f64::max)
}

/// Effective point count used by the formulas.
pub fn effective_n(report: &SynthesisReport) -> f64 {
    let n = report.n_sequences as f64;
    match report.mode {
        Some(crate::ir::Mode::Seq2seq) => n * report.n as f64,
        _ => n,
    }
}

/// `(depth formula, bits formula)` without constants.
pub fn formulas(report: &SynthesisReport, variant: Variant) -> (f64, f64) {
    let n = effective_n(report);
    let l = log_scale(report);
    let ld = (report.d.max(1) as f64).log2();
    match (variant, report.ledger_value("B")) {
        (Variant::LimitedBits, Some(b)) => {
            let sb = lg(b).sqrt();
            (n * sb / b + n * l / (b * sb), ld + b * l / sb)
        }
        _ => {
            let ln = lg(n);
            ((n * ln).sqrt() + (n / ln).sqrt() * l, ld + (n / ln).sqrt() * l)
        }
    }
}

pub fn constants(variant: Variant) -> (f64, f64) {
    match variant {
        Variant::LimitedBits => (LIMITED_DEPTH_CONSTANT, LIMITED_BITS_CONSTANT),
        _ => (DEPTH_CONSTANT, BITS_CONSTANT),
    }
}

pub fn verify_bounds(report: &SynthesisReport, variant: Variant) -> Vec<BoundCheck> {
    let (fd, fb) = formulas(report, variant);
    let (cd, cb) = constants(variant);
    let width = variant.expected_width();
    vec![
        BoundCheck {
            name: "width".into(),
            measured: report.width as f64,
            formula_value: width as f64,
            pass: report.width == width,
        },
        BoundCheck {
            name: "depth".into(),
            measured: report.depth as f64,
            formula_value: cd * fd,
            pass: (report.depth as f64) <= cd * fd,
        },
        BoundCheck {
            name: "max_bit_complexity".into(),
            measured: report.max_bit_complexity as f64,
            formula_value: cb * fb,
            pass: (report.max_bit_complexity as f64) <= cb * fb,
        },
    ]
}

fn interval_midpoint(s: &str) -> Option<f64> {
    let body = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    let (lo, hi) = body.split_once(',')?;
    Some((lo.trim().parse::<f64>().ok()? + hi.trim().parse::<f64>().ok()?) / 2.0)
}

/// Rebuilds the fields the bound checks read from a weight file alone.
pub fn report_from_weights(wf: &WeightFile) -> SynthesisReport {
    let h = &wf.header;
    let acc = wf.model.accounting();
    let mode = match &wf.model {
        Model::Transformer(m) => Some(m.mode),
        Model::Embedding(m) => Some(m.mode),
        _ => None,
    };
    let bound_ledger = h
        .ledger
        .iter()
        .filter_map(|(k, v)| {
            interval_midpoint(v).map(|approx| (k.clone(), LedgerEntry { interval: v.clone(), approx }))
        })
        .collect();
    SynthesisReport {
        variant: h.variant.clone(),
        mode,
        n_sequences: h.n_sequences,
        n: h.n,
        d: h.d,
        num_classes: h.num_classes,
        seed: h.seed,
        width: acc.width,
        block_width: acc.width,
        depth: acc.depth,
        param_count: acc.param_count,
        max_bit_complexity: acc.max_bit_complexity,
        components: Vec::new(),
        bound_ledger,
    }
}
