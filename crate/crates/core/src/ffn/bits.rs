//! Bit extraction with iterated tent maps.
//!
//! For an integer `x < 2^n` put `z1 = x/2^n + 2^-(n+1)` and
//! `z2 = x/2^n + 2^-(n+2)`. Both points sit in the same linear piece of
//! `psi^(k)` for every `k <= n`, and the slope of that piece has sign
//! `(-1)^b_k` where `b_k` is the `k`-th most significant bit of `x`. Hence
//! `b_k = 1/2 - 2^(n+1-k) (psi^(k)(z1) - psi^(k)(z2))`, an affine readout.
//!
//! Each bit costs three layers: two for one tent step on both channels and
//! one that shifts the bit into the accumulator.

use num_rational::BigRational;

use crate::error::{MemcapError, Result};
use crate::ir::{Activation, AffineLayer, ReluMLP, Unit};
use crate::numerics::{rat_pow2, Dyadic};

/// Starting channels `(z1, z2)` for `x` written with `n` bits.
pub fn extraction_seeds(x: &BigRational, n: u32) -> (BigRational, BigRational) {
    let base = x * rat_pow2(-(n as i64));
    (&base + rat_pow2(-(n as i64) - 1), base + rat_pow2(-(n as i64) - 2))
}

/// `psi` applied `steps` times, computed arithmetically.
pub fn tent_iterate(z: &BigRational, steps: u32) -> BigRational {
    let half = rat_pow2(-1);
    let two = BigRational::from_integer(2.into());
    let mut v = z.clone();
    for _ in 0..steps {
        v = if v <= half { &two * &v } else { &two - &two * &v };
    }
    v
}

/// Channel positions of one extractor inside the current layer.
#[derive(Clone, Debug)]
pub(crate) struct ExtractorLane {
    pub t1: usize,
    pub t2: usize,
    pub acc: Option<usize>,
    /// Outputs of the first tent layer while a step is in flight.
    hidden: Option<[usize; 4]>,
    pub total_bits: u32,
}

fn push(units: &mut Vec<Unit>, u: Unit) -> usize {
    units.push(u);
    units.len() - 1
}

impl ExtractorLane {
    pub fn new(t1: usize, t2: usize, total_bits: u32) -> Self {
        ExtractorLane { t1, t2, acc: None, hidden: None, total_bits }
    }

    fn carry(&mut self, units: &mut Vec<Unit>) {
        self.t1 = push(units, Unit::pass(self.t1));
        self.t2 = push(units, Unit::pass(self.t2));
        self.acc = self.acc.map(|a| push(units, Unit::pass(a)));
    }

    /// First tent layer, or a pass-through when idle.
    pub fn layer1(&mut self, units: &mut Vec<Unit>, active: bool) {
        if !active {
            return self.carry(units);
        }
        let two = Dyadic::from_int(2);
        let m2 = Dyadic::from_int(-2);
        let h = [
            push(units, Unit::zero().term_int(self.t1, 2)),
            push(units, Unit::new(m2.clone()).term_int(self.t1, 4)),
            push(units, Unit::zero().term(self.t2, two)),
            push(units, Unit::new(m2).term_int(self.t2, 4)),
        ];
        self.acc = self.acc.map(|a| push(units, Unit::pass(a)));
        self.hidden = Some(h);
    }

    pub fn layer2(&mut self, units: &mut Vec<Unit>, active: bool) {
        if !active {
            return self.carry(units);
        }
        let h = self.hidden.take().expect("layer1 ran first");
        self.t1 = push(units, Unit::pass(h[0]).term_int(h[1], -1));
        self.t2 = push(units, Unit::pass(h[2]).term_int(h[3], -1));
        self.acc = self.acc.map(|a| push(units, Unit::pass(a)));
    }

    /// Reads bit `k` (1-based from the most significant end) into the
    /// accumulator.
    pub fn layer3(&mut self, units: &mut Vec<Unit>, active: bool, k: u32) {
        if !active {
            return self.carry(units);
        }
        let w = Dyadic::pow2(self.total_bits as i64 + 1 - k as i64);
        let mut acc = Unit::new(Dyadic::pow2(-1)).term(self.t1, -&w).term(self.t2, w);
        if let Some(a) = self.acc {
            acc = acc.term_int(a, 2);
        }
        self.t1 = push(units, Unit::pass(self.t1));
        self.t2 = push(units, Unit::pass(self.t2));
        self.acc = Some(push(units, acc));
    }
}

/// Input `(psi^(i-1)(z1), psi^(i-1)(z2))`; output
/// `(psi^(j)(z1), psi^(j)(z2), BIN_{i:j}(x))`. Width 5 (4 when `i = j`),
/// depth `3(j - i + 1)`.
pub fn bit_extract_net(n_bits: u32, i: u32, j: u32) -> Result<ReluMLP> {
    if i < 1 || i > j || j > n_bits {
        return Err(MemcapError::Range(format!("bit range {i}..={j} outside 1..={n_bits}")));
    }
    let mut lane = ExtractorLane::new(0, 1, n_bits);
    let mut layers = Vec::new();
    let mut in_dim = 2;
    for k in i..=j {
        for phase in 0..3 {
            let mut units = Vec::new();
            match phase {
                0 => lane.layer1(&mut units, true),
                1 => lane.layer2(&mut units, true),
                _ => lane.layer3(&mut units, true, k),
            }
            let out = units.len();
            layers.push(AffineLayer::from_units(in_dim, units, Activation::Relu));
            in_dim = out;
        }
    }
    Ok(ReluMLP { layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat_int;

    fn run(x: i64, n: u32, i: u32, j: u32) -> Vec<BigRational> {
        let (z1, z2) = extraction_seeds(&rat_int(x), n);
        let net = bit_extract_net(n, i, j).unwrap();
        net.eval_rational(&[tent_iterate(&z1, i - 1), tent_iterate(&z2, i - 1)]).unwrap()
    }

    #[test]
    fn thirteen() {
        assert_eq!(run(13, 4, 1, 4)[2], rat_int(13));
        assert_eq!(run(13, 4, 1, 1)[2], rat_int(1));
        assert_eq!(run(13, 4, 3, 4)[2], rat_int(1));
        assert_eq!(run(13, 4, 2, 3)[2], rat_int(2));
    }

    #[test]
    fn iterates_advance() {
        let (z1, z2) = extraction_seeds(&rat_int(13), 4);
        let out = run(13, 4, 1, 3);
        assert_eq!(out[0], tent_iterate(&z1, 3));
        assert_eq!(out[1], tent_iterate(&z2, 3));
    }

    #[test]
    fn shape() {
        let net = bit_extract_net(8, 2, 5).unwrap();
        assert_eq!((net.width(), net.depth()), (5, 12));
        assert!(bit_extract_net(4, 3, 2).is_err());
        assert!(bit_extract_net(4, 1, 5).is_err());
    }
}
