//! Parameter count against N, written as CSV, with the fitted log-log slope.

use memcap::synth::Variant;
use memcap::verify::{fit_slope, scaling_sweep, write_csv};

fn main() -> memcap::Result<()> {
    let grid = [8, 16, 32];
    let rows = scaling_sweep(&grid, 4, 3, 4, &[0, 1], Variant::NextToken, None);
    write_csv(&rows, std::io::stdout())?;
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.ok).map(|r| (r.n_value as f64, r.params as f64)).collect();
    if let Some(s) = fit_slope(&pts) {
        eprintln!("log2 params vs log2 N slope: {s:.3}");
    }
    Ok(())
}
