//! Per-position labels: every column of every sequence is memorized.

use memcap::dataset::random_dataset;
use memcap::ir::Mode;
use memcap::synth::synthesize_seq2seq;

fn main() -> memcap::Result<()> {
    let ds = random_dataset(5, 6, 3, 2, 3, Mode::Seq2seq);
    let (syn, _) = synthesize_seq2seq(&ds, 5)?;
    println!("width {} depth {} params {}", syn.report.width, syn.report.depth, syn.report.param_count);
    for (i, seq) in ds.sequences.iter().enumerate() {
        let cols: Vec<_> = seq.iter().map(|t| t.0.clone()).collect();
        let out: Vec<String> = syn.model.eval(&cols)?.iter().map(|v| v[0].to_string()).collect();
        println!("sequence {i}: outputs [{}] labels {:?}", out.join(", "), ds.targets(i));
    }
    Ok(())
}
