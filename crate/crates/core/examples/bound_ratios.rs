//! Ratios of measured depth and bit complexity to the unscaled bound
//! formulas over a reference suite. The frozen constants in
//! `verify::bounds` must dominate every ratio printed here.

use memcap::dataset::{random_dataset, random_id_dataset, random_set_dataset};
use memcap::ir::{Mode, SynthesisReport};
use memcap::synth::{
    synthesize_deepset, synthesize_embedding, synthesize_next_token, synthesize_next_token_limited_bits,
    synthesize_seq2seq, Variant,
};
use memcap::verify::bounds::{constants, formulas};

fn ratios(report: &SynthesisReport, variant: Variant) -> (f64, f64) {
    let (fd, fb) = formulas(report, variant);
    (report.depth as f64 / fd, report.max_bit_complexity as f64 / fb)
}

fn main() -> memcap::Result<()> {
    let mut full = (0.0f64, 0.0f64);
    let mut limited = (0.0f64, 0.0f64);
    let mut record = |label: String, rep: &SynthesisReport, variant: Variant| {
        let (rd, rb) = ratios(rep, variant);
        let slot = if variant == Variant::LimitedBits { &mut limited } else { &mut full };
        slot.0 = slot.0.max(rd);
        slot.1 = slot.1.max(rb);
        println!("{label:<28} depth {:>5} ratio {rd:>6.3}   bits {:>4} ratio {rb:>6.3}", rep.depth, rep.max_bit_complexity);
    };
    for &n_seq in &[8usize, 16, 32, 64, 128] {
        for seed in 0..2 {
            let ds = random_dataset(seed, n_seq, 4, 3, 4, Mode::NextToken);
            let (syn, _) = synthesize_next_token(&ds, seed)?;
            record(format!("next-token N={n_seq} seed={seed}"), &syn.report, Variant::NextToken);
        }
    }
    for &n_seq in &[4usize, 8, 16, 32] {
        let ds = random_dataset(1, n_seq, 4, 3, 4, Mode::Seq2seq);
        let (syn, _) = synthesize_seq2seq(&ds, 1)?;
        record(format!("seq2seq N={n_seq}"), &syn.report, Variant::Seq2seq);
    }
    for &count in &[4usize, 8, 16, 32] {
        let ds = random_set_dataset(2, count, 4, 3, 4);
        let syn = synthesize_deepset(&ds, 2)?;
        record(format!("deepset N={count}"), &syn.report, Variant::DeepSet);
        let ids = random_id_dataset(3, count, 4, 2 * count, 4, Mode::NextToken);
        let syn = synthesize_embedding(&ids, 3)?;
        record(format!("embedding N={count}"), &syn.report, Variant::Embedding);
    }
    for &n_seq in &[16usize, 32, 64] {
        let ds = random_dataset(4, n_seq, 4, 3, 4, Mode::NextToken);
        let max = memcap::ffn::max_bits_budget(n_seq);
        for b in 1..=max {
            let (syn, _) = synthesize_next_token_limited_bits(&ds, b, 4)?;
            record(format!("limited-bits N={n_seq} B={b}"), &syn.report, Variant::LimitedBits);
        }
    }
    let (cd, cb) = constants(Variant::NextToken);
    let (ld, lb) = constants(Variant::LimitedBits);
    println!("full:    max depth ratio {:.3} (frozen {cd}), max bits ratio {:.3} (frozen {cb})", full.0, full.1);
    println!("limited: max depth ratio {:.3} (frozen {ld}), max bits ratio {:.3} (frozen {lb})", limited.0, limited.1);
    Ok(())
}
