//! Slot-wise decoding of packed anchors and labels.
//!
//! Input `(x, w, u)`: `u` packs `n` anchors of `c` bits and `w` packs `n`
//! labels of `rho` bits, most significant slot first. Slot by slot both
//! extractors run in lockstep (the shorter one idles), then a hit test of
//! `x` against the decoded anchor gates the decoded label into `y`.

use num_bigint::BigInt;

use super::bits::ExtractorLane;
use crate::error::{MemcapError, Result};
use crate::ir::{Activation, AffineLayer, ReluMLP, Unit};
use crate::numerics::Dyadic;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum DecoderOutput {
    /// `[y]`
    Value,
    /// `[x, y]`
    WithInput,
}

struct Builder {
    layers: Vec<AffineLayer>,
    dim: usize,
}

impl Builder {
    fn push(&mut self, units: Vec<Unit>, act: Activation) {
        let out = units.len();
        self.layers.push(AffineLayer::from_units(self.dim, units, act));
        self.dim = out;
    }
}

/// Width 12 (when both slot widths are at least 2), depth
/// `3n max(rho, c) + 2n + 2`.
pub fn block_decoder_net(rho: u32, n_slots: u32, c_bits: u32) -> Result<ReluMLP> {
    decoder_layers(rho, n_slots, c_bits, DecoderOutput::Value)
}

pub(crate) fn decoder_layers(rho: u32, n_slots: u32, c_bits: u32, output: DecoderOutput) -> Result<ReluMLP> {
    if rho == 0 || c_bits == 0 || n_slots == 0 {
        return Err(MemcapError::Range("slot widths and slot count must be positive".into()));
    }
    let nw = rho * n_slots;
    let nu = c_bits * n_slots;
    let mut b = Builder { layers: Vec::new(), dim: 3 };

    // seed channels z1 = v/2^n + 2^-(n+1), z2 = v/2^n + 2^-(n+2)
    let seeds = |units: &mut Vec<Unit>, src: usize, n: u32| {
        let scale = Dyadic::pow2(-(n as i64));
        units.push(Unit::new(Dyadic::pow2(-(n as i64) - 1)).term(src, scale.clone()));
        units.push(Unit::new(Dyadic::pow2(-(n as i64) - 2)).term(src, scale));
    };
    let mut h = vec![Unit::pass(0), Unit::zero()];
    seeds(&mut h, 1, nw);
    seeds(&mut h, 2, nu);
    b.push(h, Activation::Relu);

    let mut x = 0usize;
    let mut y = 1usize;
    let mut gate: Option<usize> = None;
    let mut wl = ExtractorLane::new(2, 3, nw);
    let mut ul = ExtractorLane::new(4, 5, nu);
    let steps = rho.max(c_bits);
    let accumulator_shift = Dyadic::pow2(rho as i64 + 1);

    for slot in 0..n_slots {
        for step in 0..steps {
            let w_on = step < rho;
            let u_on = step < c_bits;
            for phase in 0..3 {
                let mut units = Vec::new();
                let nx = units.len();
                units.push(Unit::pass(x));
                let ny = units.len();
                let mut yu = Unit::pass(y);
                if let Some(g) = gate.take() {
                    yu = yu.term_int(g, 1);
                }
                units.push(yu);
                match phase {
                    0 => {
                        wl.layer1(&mut units, w_on);
                        ul.layer1(&mut units, u_on);
                    }
                    1 => {
                        wl.layer2(&mut units, w_on);
                        ul.layer2(&mut units, u_on);
                    }
                    _ => {
                        wl.layer3(&mut units, w_on, slot * rho + step + 1);
                        ul.layer3(&mut units, u_on, slot * c_bits + step + 1);
                    }
                }
                x = nx;
                y = ny;
                b.push(units, Activation::Relu);
            }
        }
        let anchor = ul.acc.take().expect("anchor decoded");
        let label = wl.acc.take().expect("label decoded");

        // hit test ramps against the decoded anchor
        let mut units = vec![Unit::pass(x), Unit::pass(y)];
        let carry = |units: &mut Vec<Unit>, lane: &mut ExtractorLane| {
            lane.t1 = {
                units.push(Unit::pass(lane.t1));
                units.len() - 1
            };
            lane.t2 = {
                units.push(Unit::pass(lane.t2));
                units.len() - 1
            };
        };
        carry(&mut units, &mut wl);
        carry(&mut units, &mut ul);
        let below = units.len();
        units.push(Unit::zero().term_int(anchor, 2).term_int(x, -2));
        units.push(Unit::new(Dyadic::from_int(-2)).term_int(x, 2).term_int(anchor, -2));
        let payload = units.len();
        units.push(Unit::pass(label));
        x = 0;
        y = 1;
        b.push(units, Activation::Relu);

        // gated payload: relu(payload - 2^(rho+1) (ramp_below + ramp_above)),
        // the hit indicator and the accumulator folded into one layer
        let mut units = vec![Unit::pass(x), Unit::pass(y)];
        carry(&mut units, &mut wl);
        carry(&mut units, &mut ul);
        gate = Some(units.len());
        units.push(
            Unit::pass(payload)
                .term(below, -&accumulator_shift)
                .term(below + 1, -&accumulator_shift),
        );
        b.push(units, Activation::Relu);
    }
    let g = gate.expect("at least one slot");
    let out = match output {
        DecoderOutput::Value => vec![Unit::pass(y).term_int(g, 1)],
        DecoderOutput::WithInput => vec![Unit::pass(x), Unit::pass(y).term_int(g, 1)],
    };
    b.push(out, Activation::Identity);
    Ok(ReluMLP { layers: b.layers })
}

/// Checks that nonzero anchor slots of `u` are pairwise at least 2 apart
/// and fit in `c_bits`.
pub fn check_anchor_slots(u: &BigInt, n_slots: u32, c_bits: u32) -> Result<()> {
    let total = n_slots * c_bits;
    if u.bits() > total as u64 {
        return Err(MemcapError::PreconditionViolation(format!("anchor block {u} exceeds {total} bits")));
    }
    let anchors: Vec<BigInt> = (0..n_slots)
        .map(|s| crate::numerics::bin_slice(u, s * c_bits + 1, (s + 1) * c_bits, total))
        .collect::<Result<_>>()?;
    let nonzero: Vec<&BigInt> = anchors.iter().filter(|a| **a != BigInt::from(0)).collect();
    for i in 0..nonzero.len() {
        for j in i + 1..nonzero.len() {
            let d = nonzero[i] - nonzero[j];
            if d.magnitude() < &2u32.into() {
                return Err(MemcapError::PreconditionViolation(format!(
                    "anchors {} and {} are closer than 2",
                    nonzero[i], nonzero[j]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{pack_slots, rat, rat_int};
    use num_rational::BigRational;

    fn eval(net: &ReluMLP, x: BigRational, w: &BigInt, u: &BigInt) -> BigRational {
        net.eval_rational(&[x, BigRational::from_integer(w.clone()), BigRational::from_integer(u.clone())])
            .unwrap()[0]
            .clone()
    }

    #[test]
    fn single_slot() {
        let net = block_decoder_net(4, 1, 3).unwrap();
        let (w, u) = (BigInt::from(9), BigInt::from(5));
        assert_eq!(eval(&net, rat(53, 10), &w, &u), rat_int(9));
        assert_eq!(eval(&net, rat_int(20), &w, &u), rat_int(0));
        assert_eq!(net.depth(), 3 * 4 + 2 + 2);
    }

    #[test]
    fn two_slots_pick_second() {
        let net = block_decoder_net(3, 2, 4).unwrap();
        let w = pack_slots(&[1.into(), 2.into()], 3);
        let u = pack_slots(&[4.into(), 9.into()], 4);
        assert_eq!(eval(&net, rat_int(9), &w, &u), rat_int(2));
        assert_eq!(eval(&net, rat(9, 2), &w, &u), rat_int(1));
        assert_eq!(eval(&net, rat_int(14), &w, &u), rat_int(0));
        assert_eq!(net.width(), 12);
        assert_eq!(net.depth(), 3 * 2 * 4 + 2 * 2 + 2);
    }

    #[test]
    fn anchor_precondition() {
        let u = pack_slots(&[4.into(), 5.into()], 4);
        assert!(matches!(check_anchor_slots(&u, 2, 4), Err(MemcapError::PreconditionViolation(_))));
        let u = pack_slots(&[4.into(), 0.into()], 4);
        assert!(check_anchor_slots(&u, 2, 4).is_ok());
    }
}
