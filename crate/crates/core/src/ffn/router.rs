//! Routing of sorted scalars to per-block payloads with interval gadgets.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{MemcapError, Result};
use crate::ir::{Activation, AffineLayer, ReluMLP, Unit};
use crate::numerics::Dyadic;

/// Interval `[floor(x_first), floor(x_last) + 1]` of each block of `k`
/// consecutive sorted scalars. Fails when neighbouring scalars are closer
/// than 2.
pub fn block_intervals(xs: &[BigRational], k: usize) -> Result<Vec<(BigInt, BigInt)>> {
    check_gaps(xs)?;
    Ok(xs
        .chunks(k.max(1))
        .map(|c| (c[0].floor().to_integer(), c[c.len() - 1].floor().to_integer() + 1))
        .collect())
}

pub fn check_gaps(xs: &[BigRational]) -> Result<()> {
    let two = BigRational::from_integer(2.into());
    for (i, w) in xs.windows(2).enumerate() {
        if &w[1] - &w[0] < two {
            return Err(MemcapError::GapViolation(format!(
                "scalars {} and {} ({} and {}) are closer than 2",
                i,
                i + 1,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Readout {
    /// Final identity layer emits the payload channels only.
    Payloads,
    /// Final identity layer emits `x` followed by the payload channels.
    WithInput,
}

/// Input `[x]`. One ReLU layer copies `x`, then three layers per gadget:
/// the two ramps of the interval indicator, the indicator itself, and the
/// payload accumulation `y_c += w_{j,c} F_j(x)`. A final identity layer
/// reads out. Depth `3m + 2`; width `3 + p` for `p` payload channels.
pub(crate) fn router_layers(
    intervals: &[(BigInt, BigInt)],
    payloads: &[Vec<BigInt>],
    readout: Readout,
) -> Result<ReluMLP> {
    let p = payloads.first().map_or(0, |v| v.len());
    if payloads.len() != intervals.len() || payloads.iter().any(|v| v.len() != p) {
        return Err(MemcapError::DimensionMismatch { expected: intervals.len(), found: payloads.len() });
    }
    for (a, b) in intervals {
        if a >= b {
            return Err(MemcapError::Range(format!("support interval [{a}, {b}] is empty")));
        }
    }
    let mut layers = vec![AffineLayer::from_units(1, vec![Unit::pass(0)], Activation::Relu)];
    let mut dim = 1;
    // channel layout after each gadget: [x, y_1..y_p]
    let mut have_y = false;
    for ((a, b), w) in intervals.iter().zip(payloads) {
        let ys: Vec<usize> = if have_y { (1..=p).collect() } else { Vec::new() };
        let mut l1: Vec<Unit> = vec![Unit::pass(0)];
        l1.extend(ys.iter().map(|&i| Unit::pass(i)));
        let ramp_lo = l1.len();
        l1.push(Unit::new(Dyadic::from_int(a * BigInt::from(2))).term_int(0, -2));
        l1.push(Unit::new(Dyadic::from_int(-(b * BigInt::from(2)))).term_int(0, 2));
        let l1_dim = l1.len();
        layers.push(AffineLayer::from_units(dim, l1, Activation::Relu));

        let mut l2: Vec<Unit> = vec![Unit::pass(0)];
        l2.extend((0..ys.len()).map(|i| Unit::pass(1 + i)));
        let f_idx = l2.len();
        l2.push(Unit::new(Dyadic::one()).term_int(ramp_lo, -1).term_int(ramp_lo + 1, -1));
        let l2_dim = l2.len();
        layers.push(AffineLayer::from_units(l1_dim, l2, Activation::Relu));

        let mut l3: Vec<Unit> = vec![Unit::pass(0)];
        for (c, wc) in w.iter().enumerate() {
            let mut u = Unit::zero().term(f_idx, Dyadic::from_int(wc.clone()));
            if have_y {
                u = u.term_int(1 + c, 1);
            }
            l3.push(u);
        }
        dim = l3.len();
        layers.push(AffineLayer::from_units(l2_dim, l3, Activation::Relu));
        have_y = true;
    }
    let out: Vec<Unit> = match readout {
        Readout::Payloads => (1..=p).map(Unit::pass).collect(),
        Readout::WithInput => (0..=p).map(Unit::pass).collect(),
    };
    layers.push(AffineLayer::from_units(dim, out, Activation::Identity));
    Ok(ReluMLP { layers })
}

/// Maps each sorted scalar `x_i` to the payload of its block of
/// `k = ceil(N/m)` consecutive scalars; scalars at distance at least 2 from
/// every `x_i` map to 0 or one of the payloads. Input `[x]`, output `[y]`.
pub fn subset_router_net(x_values: &[BigRational], payloads: &[BigInt]) -> Result<ReluMLP> {
    let m = payloads.len();
    if m == 0 || m > x_values.len() {
        return Err(MemcapError::Range(format!(
            "{m} payloads for {} scalars",
            x_values.len()
        )));
    }
    let k = x_values.len().div_ceil(m);
    let intervals = block_intervals(x_values, k)?;
    if intervals.len() != m {
        return Err(MemcapError::Range(format!(
            "{} scalars in blocks of {k} give {} blocks, not {m}",
            x_values.len(),
            intervals.len()
        )));
    }
    let cols: Vec<Vec<BigInt>> = payloads.iter().map(|w| vec![w.clone()]).collect();
    router_layers(&intervals, &cols, Readout::Payloads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{rat, rat_int};

    #[test]
    fn single_block() {
        let xs = vec![rat_int(3), rat(11, 2)];
        let net = subset_router_net(&xs, &[9.into()]).unwrap();
        for x in &xs {
            assert_eq!(net.eval_rational(std::slice::from_ref(x)).unwrap()[0], rat_int(9));
        }
        assert_eq!(net.eval_rational(&[rat_int(1)]).unwrap()[0], rat_int(0));
        // no running payload yet, so only three channels
        assert_eq!((net.width(), net.depth()), (3, 5));
    }

    #[test]
    fn three_blocks() {
        let xs: Vec<BigRational> = (0..6).map(|i| rat_int(2 + 3 * i)).collect();
        let net = subset_router_net(&xs, &[4.into(), 5.into(), 6.into()]).unwrap();
        let outs: Vec<BigRational> = xs.iter().map(|x| net.eval_rational(std::slice::from_ref(x)).unwrap()[0].clone()).collect();
        assert_eq!(outs, vec![rat_int(4), rat_int(4), rat_int(5), rat_int(5), rat_int(6), rat_int(6)]);
        assert_eq!((net.width(), net.depth()), (4, 3 * 3 + 2));
    }

    #[test]
    fn gap_violation() {
        let xs = vec![rat_int(3), rat_int(4)];
        assert!(matches!(subset_router_net(&xs, &[1.into()]), Err(MemcapError::GapViolation(_))));
    }
}
