//! Two-layer ReLU gadgets: the triangle map, interval indicators and the
//! hit test.

use num_bigint::BigInt;

use crate::error::{MemcapError, Result};
use crate::ir::{Activation, AffineLayer, ReluMLP, Unit};
use crate::numerics::Dyadic;

fn d(v: i64) -> Dyadic {
    Dyadic::from_int(v)
}

/// `psi(z) = relu(relu(2z) - relu(4z - 2))`, the tent map on `[0, 1]`.
pub fn psi_net() -> ReluMLP {
    let l1 = AffineLayer::from_units(
        1,
        vec![Unit::zero().term_int(0, 2), Unit::new(d(-2)).term_int(0, 4)],
        Activation::Relu,
    );
    let l2 = AffineLayer::from_units(2, vec![Unit::zero().term_int(0, 1).term_int(1, -1)], Activation::Relu);
    ReluMLP { layers: vec![l1, l2] }
}

/// `F(x) = relu(1 - relu(2(a - x)) - relu(2(x - b)))`: one on `[a, b]`,
/// zero below `a - 1/2` and above `b + 1/2`.
pub fn support_net(a: &BigInt, b: &BigInt) -> Result<ReluMLP> {
    if a >= b {
        return Err(MemcapError::Range(format!("support interval [{a}, {b}] is empty")));
    }
    let a2 = Dyadic::from_int(a * 2);
    let b2 = Dyadic::from_int(b * 2);
    let l1 = AffineLayer::from_units(
        1,
        vec![Unit::new(a2).term_int(0, -2), Unit::new(-b2).term_int(0, 2)],
        Activation::Relu,
    );
    let l2 = AffineLayer::from_units(2, vec![Unit::new(d(1)).term_int(0, -1).term_int(1, -1)], Activation::Relu);
    Ok(ReluMLP { layers: vec![l1, l2] })
}

/// Input `(x, y)`. One when `x` lies in `[y, y + 1]`, zero when
/// `x > y + 3/2` or `x < y - 1/2`.
pub fn hittest_net() -> ReluMLP {
    let l1 = AffineLayer::from_units(
        2,
        vec![
            Unit::zero().term_int(1, 2).term_int(0, -2),
            Unit::new(d(-2)).term_int(0, 2).term_int(1, -2),
        ],
        Activation::Relu,
    );
    let l2 = AffineLayer::from_units(2, vec![Unit::new(d(1)).term_int(0, -1).term_int(1, -1)], Activation::Relu);
    ReluMLP { layers: vec![l1, l2] }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(net: &ReluMLP, x: &[&str]) -> Dyadic {
        let v: Vec<Dyadic> = x.iter().map(|s| s.parse().unwrap()).collect();
        net.eval(&v).unwrap()[0].clone()
    }

    #[test]
    fn psi_values() {
        let p = psi_net();
        assert_eq!(at(&p, &["0.75"]), "0.5".parse().unwrap());
        assert_eq!(at(&p, &["0.25"]), "0.5".parse().unwrap());
        assert_eq!(at(&p, &["0.5"]), d(1));
    }

    #[test]
    fn support_zones() {
        let s = support_net(&2.into(), &5.into()).unwrap();
        assert_eq!(at(&s, &["3"]), d(1));
        assert_eq!(at(&s, &["6"]), d(0));
        assert_eq!(at(&s, &["5.25"]), "0.5".parse().unwrap());
        assert_eq!(at(&s, &["1.5"]), d(0));
        assert!(support_net(&5.into(), &5.into()).is_err());
        assert_eq!((s.width(), s.depth()), (2, 2));
    }

    #[test]
    fn hittest_zones() {
        let h = hittest_net();
        assert_eq!(at(&h, &["5", "5"]), d(1));
        assert_eq!(at(&h, &["7", "5"]), d(0));
        assert_eq!(at(&h, &["5.25", "5"]), d(1));
        assert_eq!(at(&h, &["4.5", "5"]), d(0));
        assert_eq!((h.width(), h.depth()), (2, 2));
    }
}
