//! A width-12 ReLU network mapping labeled points to their labels and a
//! second point set to zero, exactly.

use memcap::ffn::memorizing_ffn;
use memcap::numerics::BigRational;
use num_traits::Zero;

fn pt(x: i64, y: i64) -> Vec<BigRational> {
    vec![BigRational::from_integer(x.into()), BigRational::from_integer(y.into())]
}

fn main() -> memcap::Result<()> {
    let points = vec![pt(0, 0), pt(3, 1), pt(-2, 5), pt(4, -4), pt(1, 7), pt(-6, -1)];
    let labels = vec![3, 1, 4, 1, 5, 2];
    let tail = vec![pt(2, 2), pt(-3, 3)];
    let net = memorizing_ffn(&points, &labels, &tail, 0)?;
    for c in &net.components {
        println!("{:<18} width {:>2} depth {:>3} params {:>5} bits {:>3}", c.name, c.width, c.depth, c.param_count, c.max_bit_complexity);
    }
    for (p, y) in points.iter().zip(&labels) {
        println!("f({}, {}) = {} (label {y})", p[0], p[1], net.net.eval_rational(p)?[0]);
    }
    for p in &tail {
        let v = net.net.eval_rational(p)?[0].clone();
        println!("f({}, {}) = {v} (tail, zero: {})", p[0], p[1], v.is_zero());
    }
    Ok(())
}
