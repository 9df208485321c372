//! Synthesizes a next-token transformer, audits it with the independent
//! evaluator and writes the weight file.

use memcap::dataset::random_dataset;
use memcap::ir::{Mode, Model};
use memcap::synth::{synthesize_next_token, Variant};
use memcap::verify::{brute_force_context_check, verify_bounds, verify_memorization, Inputs};

fn main() -> memcap::Result<()> {
    let ds = random_dataset(1, 12, 4, 3, 4, Mode::NextToken);
    let (syn, parts) = synthesize_next_token(&ds, 1)?;
    let r = &syn.report;
    println!("width {} depth {} params {} max bits {}", r.width, r.depth, r.param_count, r.max_bit_complexity);
    println!("{} distinct context ids", parts.contexts.len());

    let rep = verify_memorization(&Model::Transformer(syn.model.clone()), &Inputs::Sequences(&ds))?;
    println!("memorization exact: {}", rep.memorization_ok);
    let ctx = brute_force_context_check(&syn.model, &ds)?;
    println!("context gap {:.4} (need >= {:.4}), max norm {:.1} <= {:.3e}", ctx.min_distance, 1.0 / ds.n as f64, ctx.max_norm, ctx.bound);
    for b in verify_bounds(r, Variant::NextToken) {
        println!("{:<20} {:>8} vs {:>10.1}  {}", b.name, b.measured, b.formula_value, if b.pass { "ok" } else { "FAIL" });
    }
    let path = std::env::temp_dir().join("memcap-next-token.json");
    syn.weight_file().save(&path)?;
    println!("weights written to {}", path.display());
    Ok(())
}
