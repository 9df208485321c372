//! Token ids looked up in an embedding table instead of vector tokens.

use memcap::dataset::random_id_dataset;
use memcap::ir::Mode;
use memcap::synth::synthesize_embedding;

fn main() -> memcap::Result<()> {
    let ds = random_id_dataset(2, 8, 4, 10, 3, Mode::NextToken);
    let syn = synthesize_embedding(&ds, 2)?;
    let m = &syn.model;
    println!(
        "vocab {} table params {} head params {} width {} depth {}",
        m.vocab(),
        m.embedding_params(),
        m.head_params(),
        syn.report.width,
        syn.report.depth
    );
    let flat = ds.as_dataset();
    for (i, ids) in ds.sequences.iter().enumerate() {
        println!("{ids:?} -> {} (label {:?})", m.eval(ids)?[0][0], flat.targets(i));
    }
    Ok(())
}
