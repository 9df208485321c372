//! Every binary labeling of a fixed input set is memorized exactly.
//! Usage: `shatter [N]` (default 5, at most 12).

use memcap::dataset::distinct_token_dataset;
use memcap::ir::Mode;
use memcap::verify::shatter_sweep;

fn main() -> memcap::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let inputs = distinct_token_dataset(7, n, 3, 2);
    let summary = shatter_sweep(&inputs, Mode::NextToken, 7)?;
    println!("{}/{} labelings exact, largest model {} params", summary.succeeded, summary.total, summary.max_params);
    Ok(())
}
