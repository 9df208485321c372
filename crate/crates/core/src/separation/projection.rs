//! Random one-dimensional projections that keep every pair of points
//! apart by a guaranteed fraction of their distance.
//!
//! For a set `X` in `Q^d` a unit-ball vector `v` is accepted when for every
//! pair `|X|^-2 * sqrt(8 / (pi d)) * |x - x'| <= |v.(x - x')| <= |x - x'|`.
//! Both inequalities are checked exactly after clearing denominators, with a
//! certified lower bound for `pi`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{MemcapError, Result};
use crate::numerics::{CertifiedReal, Dyadic};

pub const RANDOM_ATTEMPTS: usize = 1024;
const FALLBACK_ATTEMPTS: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub v: Vec<Dyadic>,
    /// Number of candidate directions tried, including the accepted one.
    pub attempts: usize,
    pub fallback: bool,
}

/// Points scaled to a common integer lattice; the projection inequalities
/// are invariant under this scaling.
struct Lattice {
    points: Vec<Vec<BigInt>>,
    /// `|x_i - x_j|^2` for `i < j`, row-major.
    sq_dists: Vec<Vec<BigInt>>,
}

impl Lattice {
    fn new(points: &[Vec<BigRational>]) -> Lattice {
        let den = points
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let den = BigRational::from_integer(den);
        let points: Vec<Vec<BigInt>> = points
            .iter()
            .map(|p| p.iter().map(|q| (q * &den).to_integer()).collect())
            .collect();
        let sq_dists = (0..points.len())
            .into_par_iter()
            .map(|i| {
                (i + 1..points.len())
                    .map(|j| {
                        points[i]
                            .iter()
                            .zip(&points[j])
                            .map(|(a, b)| {
                                let d = a - b;
                                &d * &d
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Lattice { points, sq_dists }
    }
}

/// Fractional bits used to quantize candidate directions.
pub fn quantization_bits(count: usize, dim: usize) -> u32 {
    let lc = usize::BITS - count.max(1).leading_zeros();
    let ld = usize::BITS - dim.max(1).leading_zeros();
    2 * lc + ld + 12
}

/// `(dim + 1) 2^-bits`: truncating a unit direction to `bits` fractional
/// bits keeps its norm in `[1 - slack, 1]`.
pub fn quantization_slack(count: usize, dim: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(dim + 1)) * crate::numerics::rat_pow2(-(quantization_bits(count, dim) as i64))
}

/// Scales a direction to the unit sphere and truncates it to `bits`
/// fractional bits, keeping `|v| <= 1` exactly.
fn quantize(dir: &[f64], bits: u32) -> Option<Vec<Dyadic>> {
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm <= 0.0 {
        return None;
    }
    let scale = 2f64.powi(bits as i32);
    let mut nums: Vec<BigInt> = dir
        .iter()
        .map(|x| BigInt::from(((x / norm) * scale).trunc() as i128))
        .collect();
    let limit = BigInt::one() << (2 * bits as usize);
    loop {
        let sq: BigInt = nums.iter().map(|n| n * n).sum();
        if sq <= limit {
            break;
        }
        let k = (0..nums.len()).max_by_key(|&k| nums[k].abs()).unwrap();
        let step = if nums[k].is_positive() { -1 } else { 1 };
        nums[k] += step;
    }
    if nums.iter().all(|n| n.is_zero()) {
        return None;
    }
    Some(nums.into_iter().map(|n| Dyadic::new(n, bits)).collect())
}

/// Rational lower bound for `pi` used by the exact checks.
pub fn pi_lower() -> BigRational {
    CertifiedReal::pi().enclosure(64).expect("pi encloses").0
}

/// `(|X|^4 * d * pi_lo)`, the factor on the left of the squared lower
/// inequality.
fn lower_factor(count: usize, dim: usize) -> BigRational {
    let c = BigRational::from_integer(BigInt::from(count));
    let c2 = &c * &c;
    &c2 * &c2 * BigRational::from_integer(BigInt::from(dim)) * pi_lower()
}

fn accepts(lat: &Lattice, v: &[Dyadic], factor: &BigRational) -> bool {
    if lat.points.len() < 2 {
        return true;
    }
    let bits = v.iter().map(|x| x.exp()).max().unwrap_or(0);
    let vi: Vec<BigInt> = v.iter().map(|x| x.mul_pow2(bits as i64).floor()).collect();
    let proj: Vec<BigInt> = lat
        .points
        .iter()
        .map(|p| p.iter().zip(&vi).map(|(a, b)| a * b).sum())
        .collect();
    // lhs: (v.D)^2 * factor >= 8 |D|^2 * 4^bits, with factor = a/b
    let (fa, fb) = (factor.numer().clone(), factor.denom().clone());
    let scale = BigInt::one() << (2 * bits as usize);
    let low_rhs = BigInt::from(8) * &fb * &scale;
    (0..proj.len()).into_par_iter().all(|i| {
        (i + 1..proj.len()).all(|j| {
            let dp = &proj[i] - &proj[j];
            let dp2 = &dp * &dp;
            let dsq = &lat.sq_dists[i][j - i - 1];
            &dp2 * &fa >= dsq * &low_rhs && dp2 <= dsq * &scale
        })
    })
}

/// Checks both projection inequalities for `v` on `points` exactly.
pub fn check_projection(points: &[Vec<BigRational>], v: &[Dyadic]) -> bool {
    let distinct = dedup(points);
    let lat = Lattice::new(&distinct);
    let dim = points.first().map_or(1, |p| p.len());
    accepts(&lat, v, &lower_factor(distinct.len(), dim))
}

fn dedup(points: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let mut v = points.to_vec();
    v.sort();
    v.dedup();
    v
}

fn unit(dim: usize) -> Vec<Dyadic> {
    let mut v = vec![Dyadic::zero(); dim];
    v[0] = Dyadic::one();
    v
}

/// Searches seeded Gaussian directions, then pairwise difference directions.
pub fn find_projection_vector(points: &[Vec<BigRational>], seed: u64) -> Result<Projection> {
    let dim = points.first().map_or(0, |p| p.len());
    if dim == 0 {
        return Err(MemcapError::DimensionMismatch { expected: 1, found: 0 });
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(MemcapError::DimensionMismatch { expected: dim, found: p.len() });
    }
    let distinct = dedup(points);
    if distinct.len() < 2 {
        return Ok(Projection { v: unit(dim), attempts: 1, fallback: false });
    }
    let lat = Lattice::new(&distinct);
    let factor = lower_factor(distinct.len(), dim);
    let bits = quantization_bits(distinct.len(), dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=RANDOM_ATTEMPTS {
        let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(v) = quantize(&dir, bits) {
            if accepts(&lat, &v, &factor) {
                return Ok(Projection { v, attempts: attempt, fallback: false });
            }
        }
    }
    let mut tried = RANDOM_ATTEMPTS;
    for i in 0..lat.points.len() {
        for j in i + 1..lat.points.len() {
            if tried >= RANDOM_ATTEMPTS + FALLBACK_ATTEMPTS {
                return Err(MemcapError::SearchExhausted { attempts: tried });
            }
            tried += 1;
            let dir: Vec<f64> = lat.points[i]
                .iter()
                .zip(&lat.points[j])
                .map(|(a, b)| (a - b).to_f64().unwrap_or(0.0))
                .collect();
            if let Some(v) = quantize(&dir, bits) {
                if accepts(&lat, &v, &factor) {
                    return Ok(Projection { v, attempts: tried, fallback: true });
                }
            }
        }
    }
    Err(MemcapError::SearchExhausted { attempts: tried })
}

/// `v . x` exactly.
pub fn project(v: &[Dyadic], x: &[BigRational]) -> BigRational {
    v.iter().zip(x).map(|(a, b)| a.to_rational() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat_int;

    #[test]
    fn single_point_gives_first_axis() {
        let p = find_projection_vector(&[vec![rat_int(3), rat_int(4)]], 0).unwrap();
        assert_eq!(p.v, vec![Dyadic::one(), Dyadic::zero()]);
    }

    #[test]
    fn small_grid_is_separated() {
        let pts: Vec<Vec<BigRational>> = (0..4)
            .flat_map(|a| (0..3).map(move |b| vec![rat_int(a), rat_int(b)]))
            .collect();
        let p = find_projection_vector(&pts, 7).unwrap();
        assert!(check_projection(&pts, &p.v));
        let sq: BigRational = p.v.iter().map(|x| x.to_rational() * x.to_rational()).sum();
        assert!(sq <= rat_int(1));
    }

    #[test]
    fn rejects_collapsing_direction() {
        let pts = vec![vec![rat_int(0), rat_int(0)], vec![rat_int(0), rat_int(1)]];
        assert!(!check_projection(&pts, &[Dyadic::one(), Dyadic::zero()]));
        assert!(check_projection(&pts, &[Dyadic::zero(), Dyadic::one()]));
    }
}
