//! Dyadic arithmetic, bit complexity and certified rounding.

use memcap::numerics::{bin_slice, BigInt, CertifiedReal, Dyadic};

fn main() -> memcap::Result<()> {
    let a: Dyadic = "1.375".parse()?;
    let b: Dyadic = "-0.0625".parse()?;
    let sum = &a + &b;
    let prod = &a * &b;
    println!("{a} + {b} = {sum}   (bit complexity {})", sum.bit_complexity());
    println!("{a} * {b} = {prod}  (bit complexity {})", prod.bit_complexity());
    println!("0.1 parses as a dyadic: {}", "0.1".parse::<Dyadic>().is_ok());

    // ceil(4 N^2 sqrt(pi)) for N = 16, certified by interval refinement
    let n = CertifiedReal::from_int(16);
    let top = CertifiedReal::from_int(4) * (&n * &n) * CertifiedReal::pi().sqrt();
    println!("4 N^2 sqrt(pi) in {} -> ceil {}", top.interval_string(8), top.certified_ceil()?);

    let x = BigInt::from(0b1011_0110);
    for (i, j) in [(1, 4), (5, 8), (3, 6)] {
        println!("BIN_{{{i}:{j}}}({x:08b}) = {:b}", bin_slice(&x, i, j, 8)?);
    }
    Ok(())
}
