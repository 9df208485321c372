//! Projection of separated points to well-spaced positive scalars.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{MemcapError, Result};
use crate::ir::{Activation, AffineLayer, ReluMLP, Unit};
use crate::numerics::{rat_int, CertifiedReal, Dyadic};
use crate::separation::{find_projection_vector, project, SeparationParams};

#[derive(Clone, Debug)]
pub struct ScalarEmbedding {
    /// Width 1, depth 2.
    pub net: ReluMLP,
    /// Output at each input point, in input order.
    pub values: Vec<BigRational>,
    /// `20 r V^2 sqrt(pi d) / delta`.
    pub range_bound: CertifiedReal,
    pub v: Vec<Dyadic>,
    /// Power-of-two exponent of the scale.
    pub scale_exp: u32,
    pub shift: BigInt,
}

/// `20 r V^2 sqrt(pi d) / delta` with normalized `r` and `delta`.
pub fn range_bound(params: &SeparationParams, v_count: usize, dim: usize) -> CertifiedReal {
    let v2 = (v_count * v_count) as i64;
    CertifiedReal::from_int(20 * v2) * params.r() * (CertifiedReal::pi() * CertifiedReal::from_int(dim as i64)).sqrt()
        / params.delta()
}

/// Layer 1 computes `relu(v.x - f)` with `f` the floor of the smallest
/// projection; layer 2 computes `relu(2^s h + 2)` with `s` the least
/// exponent making every gap at least 2. The range, gap and lower-bound
/// properties are checked exactly before returning.
pub fn project_net(points: &[Vec<BigRational>], params: &SeparationParams, seed: u64) -> Result<ScalarEmbedding> {
    let dim = points.first().map_or(0, |p| p.len());
    let distinct: Vec<Vec<BigRational>> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if distinct.is_empty() {
        return Err(MemcapError::Range("no points to embed".into()));
    }
    let proj = find_projection_vector(&distinct, seed)?;
    let v = proj.v;
    let mut sorted: Vec<BigRational> = distinct.iter().map(|x| project(&v, x)).collect();
    sorted.sort();
    let shift = sorted[0].floor().to_integer();
    let two = rat_int(2);
    let mut scale_exp = 0u32;
    if let Some(gap) = sorted.windows(2).map(|w| &w[1] - &w[0]).min() {
        if gap.is_zero() {
            return Err(MemcapError::Degenerate("projection collapses two points".into()));
        }
        while &gap * rat_int(BigInt::from(1) << scale_exp) < two {
            scale_exp += 1;
        }
    }

    let mut l1 = Unit::new(Dyadic::from_int(-shift.clone()));
    for (i, c) in v.iter().enumerate() {
        if !c.is_zero() {
            l1 = l1.term(i, c.clone());
        }
    }
    let l2 = Unit::new(Dyadic::from_int(2)).term(0, Dyadic::pow2(scale_exp as i64));
    let net = ReluMLP {
        layers: vec![
            AffineLayer::from_units(dim, vec![l1], Activation::Relu),
            AffineLayer::from_units(1, vec![l2], Activation::Relu),
        ],
    };

    let values = points
        .iter()
        .map(|p| net.eval_rational(p).map(|o| o[0].clone()))
        .collect::<Result<Vec<_>>>()?;
    let range_bound = range_bound(params, distinct.len(), dim);
    let emb = ScalarEmbedding { net, values, range_bound, v, scale_exp, shift };
    check_embedding(&emb, points)?;
    Ok(emb)
}

/// Exact audit: outputs in `[2, R]` and distinct points at least 2 apart.
pub fn check_embedding(emb: &ScalarEmbedding, points: &[Vec<BigRational>]) -> Result<()> {
    let two = rat_int(2);
    let mut pairs: Vec<(&BigRational, &Vec<BigRational>)> = emb.values.iter().zip(points).collect();
    pairs.sort();
    pairs.dedup_by(|a, b| a.1 == b.1);
    for (x, _) in &pairs {
        if *x < &two {
            return Err(MemcapError::Range(format!("embedded value {x} below 2")));
        }
    }
    if let Some((top, _)) = pairs.last() {
        if emb.range_bound.cmp_rational(top)? == std::cmp::Ordering::Less {
            return Err(MemcapError::Range(format!("embedded value {top} exceeds the range bound")));
        }
    }
    for w in pairs.windows(2) {
        if w[0].1 != w[1].1 && w[1].0 - w[0].0 < two {
            return Err(MemcapError::GapViolation(format!("embedded values {} and {} closer than 2", w[0].0, w[1].0)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::point_params;

    #[test]
    fn single_point() {
        let pts = vec![vec![rat_int(3), rat_int(-4)]];
        let e = project_net(&pts, &point_params(&pts), 0).unwrap();
        assert!(e.values[0] >= rat_int(2) && e.values[0] < rat_int(3));
        assert_eq!((e.net.width(), e.net.depth()), (1, 2));
    }

    #[test]
    fn unit_pair_spreads() {
        let pts = vec![vec![rat_int(0), rat_int(0)], vec![rat_int(0), rat_int(1)]];
        let e = project_net(&pts, &point_params(&pts), 5).unwrap();
        let d = &e.values[1] - &e.values[0];
        assert!(d.clone() * d >= rat_int(4));
    }

    #[test]
    fn duplicates_share_values() {
        let pts = vec![vec![rat_int(1)], vec![rat_int(5)], vec![rat_int(1)]];
        let e = project_net(&pts, &point_params(&pts), 1).unwrap();
        assert_eq!(e.values[0], e.values[2]);
    }
}
