//! Reads bits out of an integer with a ReLU network built from tent maps and
//! compares against direct slicing.

use memcap::ffn::{bit_extract_net, extraction_seeds, tent_iterate};
use memcap::numerics::{bin_slice, BigInt, BigRational};

fn main() -> memcap::Result<()> {
    let n_bits = 12;
    let x = 0b1100_1010_0111u64;
    let xr = BigRational::from_integer(x.into());
    let (z1, z2) = extraction_seeds(&xr, n_bits);
    for (i, j) in [(1, 4), (5, 8), (9, 12), (2, 11)] {
        let net = bit_extract_net(n_bits, i, j)?;
        let out = net.eval_rational(&[tent_iterate(&z1, i - 1), tent_iterate(&z2, i - 1)])?;
        let oracle = bin_slice(&BigInt::from(x), i, j, n_bits)?;
        println!(
            "bits {i:>2}..={j:<2} width {} depth {:>2}: network {:>4}  slice {:>4}",
            net.width(),
            net.depth(),
            out[2],
            oracle
        );
    }
    Ok(())
}
