//! A permutation-invariant model `rho(sum phi(x))` that memorizes labeled
//! multisets.

use memcap::dataset::random_set_dataset;
use memcap::synth::synthesize_deepset;

fn main() -> memcap::Result<()> {
    let ds = random_set_dataset(3, 6, 4, 2, 3);
    let syn = synthesize_deepset(&ds, 3)?;
    println!("width {} depth {} params {}", syn.report.width, syn.report.depth, syn.report.param_count);
    for (set, y) in ds.sets.iter().zip(&ds.labels) {
        let elems: Vec<_> = set.iter().map(|t| t.0.clone()).collect();
        let mut reversed = elems.clone();
        reversed.reverse();
        let a = syn.model.eval(&elems)?;
        let b = syn.model.eval(&reversed)?;
        println!("size {} label {y}: output {} reversed {}", set.len(), a[0], b[0]);
    }
    Ok(())
}
