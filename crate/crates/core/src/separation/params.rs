use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::One;

use crate::dataset::Token;
use crate::numerics::CertifiedReal;

/// Measured token-wise separation of a point set. `r` and `delta` are the
/// normalized values `max(r, 1)` and `min(delta, 1)`; the raw squared
/// quantities are kept exactly.
#[derive(Clone, Debug)]
pub struct SeparationParams {
    pub r_sq: BigRational,
    pub delta_sq: BigRational,
}

pub fn sq_dist(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl SeparationParams {
    pub fn raw_r(&self) -> CertifiedReal {
        CertifiedReal::from_rational(self.r_sq.clone()).sqrt()
    }

    pub fn raw_delta(&self) -> CertifiedReal {
        CertifiedReal::from_rational(self.delta_sq.clone()).sqrt()
    }

    pub fn r(&self) -> CertifiedReal {
        let one = BigRational::one();
        CertifiedReal::from_rational(if self.r_sq < one { one } else { self.r_sq.clone() }).sqrt()
    }

    pub fn delta(&self) -> CertifiedReal {
        let one = BigRational::one();
        CertifiedReal::from_rational(if self.delta_sq > one { one } else { self.delta_sq.clone() }).sqrt()
    }
}

/// Largest norm and smallest pairwise distance among distinct tokens. A
/// single distinct token gives `delta = 1`.
pub fn check_separated(tokens: &[Token]) -> SeparationParams {
    let distinct: Vec<Vec<BigRational>> = tokens
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|t| t.to_rational())
        .collect();
    point_params(&distinct)
}

/// As [`check_separated`] for rational points; duplicates are ignored.
pub fn point_params(points: &[Vec<BigRational>]) -> SeparationParams {
    let distinct: Vec<&Vec<BigRational>> = points.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let r_sq = distinct
        .iter()
        .map(|p| p.iter().map(|x| x * x).sum::<BigRational>())
        .max()
        .unwrap_or_else(BigRational::one);
    let mut delta_sq: Option<BigRational> = None;
    for i in 0..distinct.len() {
        for j in i + 1..distinct.len() {
            let d = sq_dist(distinct[i], distinct[j]);
            if delta_sq.as_ref().is_none_or(|m| d < *m) {
                delta_sq = Some(d);
            }
        }
    }
    SeparationParams { r_sq, delta_sq: delta_sq.unwrap_or_else(BigRational::one) }
}
