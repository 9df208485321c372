//! Trading depth for bit complexity with a bits budget `B`.

use memcap::dataset::random_dataset;
use memcap::ffn::max_bits_budget;
use memcap::ir::{Mode, Model};
use memcap::synth::synthesize_next_token_limited_bits;
use memcap::verify::{verify_memorization, Inputs};

fn main() -> memcap::Result<()> {
    let n_seq = 16;
    let ds = random_dataset(4, n_seq, 4, 3, 4, Mode::NextToken);
    println!("{:>3} {:>6} {:>8} {:>5} {:>6}", "B", "depth", "params", "bits", "exact");
    for b in 1..=max_bits_budget(n_seq) {
        let (syn, _) = synthesize_next_token_limited_bits(&ds, b, 4)?;
        let exact = verify_memorization(&Model::Transformer(syn.model), &Inputs::Sequences(&ds))?.memorization_ok;
        let r = &syn.report;
        println!("{b:>3} {:>6} {:>8} {:>5} {:>6}", r.depth, r.param_count, r.max_bit_complexity, exact);
    }
    Ok(())
}
