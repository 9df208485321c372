//! Certified reals: expression trees over rationals, `pi` and square roots
//! that can be enclosed in rational intervals of any requested precision.
//!
//! Enclosures are evaluated with interval arithmetic. Transcendental leaves
//! are rounded outward to multiples of `2^-bits`; everything else stays
//! exact, so refining `bits` always shrinks the interval toward the value.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::dyadic::Dyadic;
use crate::error::{MemcapError, Result};

pub const DEFAULT_PRECISION_CAP: u32 = 4096;
const START_BITS: u32 = 64;

/// Fractional-bit cap for escalation, overridable through
/// `MEMCAP_PRECISION_CAP`.
pub fn precision_cap() -> u32 {
    std::env::var("MEMCAP_PRECISION_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|v| *v >= 8)
        .unwrap_or(DEFAULT_PRECISION_CAP)
}

#[derive(Debug)]
enum Node {
    Exact(BigRational),
    Interval(BigRational, BigRational),
    Pi,
    Sqrt(Arc<Node>),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    Neg(Arc<Node>),
}

#[derive(Clone, Debug)]
pub struct CertifiedReal {
    node: Arc<Node>,
}

type Iv = (BigRational, BigRational);

fn pow2_rat(bits: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << (bits as usize))
}

fn pi_cache() -> &'static Mutex<BTreeMap<u32, Iv>> {
    static CACHE: OnceLock<Mutex<BTreeMap<u32, Iv>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// `arctan(1/x) * 2^p` by the alternating series with truncated terms.
/// Returns the approximation and the number of terms used.
fn arctan_inv_scaled(x: u64, p: u32) -> (BigInt, u64) {
    let one = BigInt::one() << (p as usize);
    let x2 = BigInt::from(x * x);
    let mut power = &one / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    (sum, k)
}

fn pi_enclosure(bits: u32) -> Iv {
    if let Some(iv) = pi_cache().lock().unwrap().get(&bits) {
        return iv.clone();
    }
    let p = bits + 16;
    let (a, ta) = arctan_inv_scaled(5, p);
    let (b, tb) = arctan_inv_scaled(239, p);
    let approx = a * 16 - b * 4;
    // each series truncates at most 2 units per term plus a tail below one unit
    let err = BigInt::from(16 * (2 * ta + 2) + 4 * (2 * tb + 2));
    let scale = pow2_rat(p);
    let lo = BigRational::from_integer(&approx - &err) / &scale;
    let hi = BigRational::from_integer(&approx + &err) / &scale;
    let iv = (lo, hi);
    pi_cache().lock().unwrap().insert(bits, iv.clone());
    iv
}

fn isqrt_floor(q: &BigRational, bits: u32) -> BigRational {
    if !q.is_positive() {
        return BigRational::zero();
    }
    let scaled = (q * pow2_rat(2 * bits)).floor().to_integer();
    BigRational::new(scaled.sqrt(), BigInt::one() << (bits as usize))
}

fn isqrt_ceil(q: &BigRational, bits: u32) -> BigRational {
    if !q.is_positive() {
        return BigRational::zero();
    }
    let scaled = (q * pow2_rat(2 * bits)).ceil().to_integer();
    let r = scaled.sqrt();
    let r = if &r * &r == scaled { r } else { r + 1 };
    BigRational::new(r, BigInt::one() << (bits as usize))
}

fn exact_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

fn min_max(vals: [BigRational; 4]) -> Iv {
    let mut lo = vals[0].clone();
    let mut hi = vals[0].clone();
    for v in &vals[1..] {
        if *v < lo {
            lo = v.clone();
        }
        if *v > hi {
            hi = v.clone();
        }
    }
    (lo, hi)
}

fn enclose(node: &Node, bits: u32) -> Option<Iv> {
    Some(match node {
        Node::Exact(q) => (q.clone(), q.clone()),
        Node::Interval(a, b) => (a.clone(), b.clone()),
        Node::Pi => pi_enclosure(bits),
        Node::Sqrt(a) => {
            let (lo, hi) = enclose(a, bits)?;
            if hi.is_negative() {
                return None;
            }
            if lo == hi {
                if let Some(r) = exact_sqrt(&lo) {
                    return Some((r.clone(), r));
                }
            }
            (isqrt_floor(&lo, bits), isqrt_ceil(&hi, bits))
        }
        Node::Add(a, b) => {
            let (al, ah) = enclose(a, bits)?;
            let (bl, bh) = enclose(b, bits)?;
            (al + bl, ah + bh)
        }
        Node::Sub(a, b) => {
            let (al, ah) = enclose(a, bits)?;
            let (bl, bh) = enclose(b, bits)?;
            (al - bh, ah - bl)
        }
        Node::Mul(a, b) => {
            let (al, ah) = enclose(a, bits)?;
            let (bl, bh) = enclose(b, bits)?;
            min_max([&al * &bl, &al * &bh, &ah * &bl, &ah * &bh])
        }
        Node::Div(a, b) => {
            let (al, ah) = enclose(a, bits)?;
            let (bl, bh) = enclose(b, bits)?;
            if !bl.is_positive() && !bh.is_negative() {
                return None;
            }
            min_max([&al / &bl, &al / &bh, &ah / &bl, &ah / &bh])
        }
        Node::Neg(a) => {
            let (lo, hi) = enclose(a, bits)?;
            (-hi, -lo)
        }
    })
}

impl CertifiedReal {
    fn wrap(node: Node) -> Self {
        CertifiedReal { node: Arc::new(node) }
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::wrap(Node::Exact(q))
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Self::from_rational(BigRational::from_integer(v.into()))
    }

    pub fn from_dyadic(d: &Dyadic) -> Self {
        Self::from_rational(d.to_rational())
    }

    /// A fixed enclosure that cannot be refined further.
    pub fn interval(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(MemcapError::Range(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self::wrap(Node::Interval(lo, hi)))
    }

    pub fn pi() -> Self {
        Self::wrap(Node::Pi)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(Node::Sqrt(self.node.clone()))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.node.as_ref(), Node::Exact(_))
    }

    /// Rational enclosure with transcendental leaves at `bits` fractional bits.
    pub fn enclosure(&self, bits: u32) -> Result<Iv> {
        enclose(&self.node, bits).ok_or(MemcapError::PrecisionExhausted { bits })
    }

    /// Runs `decide` on enclosures of doubling precision until it returns a
    /// value or the cap is exceeded.
    fn escalate<T>(&self, mut decide: impl FnMut(&BigRational, &BigRational) -> Option<T>) -> Result<T> {
        let cap = precision_cap();
        let mut bits = START_BITS.min(cap);
        loop {
            if let Some((lo, hi)) = enclose(&self.node, bits) {
                if let Some(v) = decide(&lo, &hi) {
                    return Ok(v);
                }
            }
            if bits >= cap {
                return Err(MemcapError::PrecisionExhausted { bits: cap });
            }
            bits = (bits * 2).min(cap);
        }
    }

    pub fn certified_ceil(&self) -> Result<BigInt> {
        self.escalate(|lo, hi| {
            let (a, b) = (lo.ceil(), hi.ceil());
            (a == b).then(|| a.to_integer())
        })
    }

    pub fn certified_floor(&self) -> Result<BigInt> {
        self.escalate(|lo, hi| {
            let (a, b) = (lo.floor(), hi.floor());
            (a == b).then(|| a.to_integer())
        })
    }

    /// Certified comparison against a rational. Equality is only reported
    /// when the enclosure collapses to that point.
    pub fn cmp_rational(&self, q: &BigRational) -> Result<Ordering> {
        self.escalate(|lo, hi| {
            if hi < q {
                Some(Ordering::Less)
            } else if lo > q {
                Some(Ordering::Greater)
            } else if lo == hi {
                Some(Ordering::Equal)
            } else {
                None
            }
        })
    }

    pub fn cmp_real(&self, other: &CertifiedReal) -> Result<Ordering> {
        (self - other).cmp_rational(&BigRational::zero())
    }

    /// A rational lower bound at the default working precision.
    pub fn lower(&self) -> Result<BigRational> {
        self.escalate(|lo, _| Some(lo.clone()))
    }

    pub fn upper(&self) -> Result<BigRational> {
        self.escalate(|_, hi| Some(hi.clone()))
    }

    pub fn to_f64(&self) -> f64 {
        match enclose(&self.node, 128) {
            Some((lo, hi)) => rat_to_f64(&((lo + hi) / BigRational::from_integer(2.into()))),
            None => f64::NAN,
        }
    }

    /// `"[lo, hi]"` with outward rounding to `digits` decimal places.
    pub fn interval_string(&self, digits: usize) -> String {
        match self.enclosure(128) {
            Ok((lo, hi)) => format!(
                "[{}, {}]",
                decimal_string(&lo, digits, false),
                decimal_string(&hi, digits, true)
            ),
            Err(_) => "[-inf, inf]".to_string(),
        }
    }
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Decimal rendering of a rational rounded down (or up) to `digits` places.
pub fn decimal_string(q: &BigRational, digits: usize, round_up: bool) -> String {
    let scale = BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let s = q * &scale;
    let n = if round_up { s.ceil() } else { s.floor() }.to_integer();
    let neg = n.is_negative();
    let mut txt = n.abs().to_string();
    if digits > 0 {
        if txt.len() <= digits {
            txt = format!("{}{}", "0".repeat(digits + 1 - txt.len()), txt);
        }
        txt.insert(txt.len() - digits, '.');
    }
    if neg {
        format!("-{txt}")
    } else {
        txt
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.interval_string(6))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $variant:ident) => {
        impl $tr for &CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, rhs: &CertifiedReal) -> CertifiedReal {
                if let (Node::Exact(a), Node::Exact(b)) = (self.node.as_ref(), rhs.node.as_ref()) {
                    return CertifiedReal::from_rational(a.$m(b));
                }
                CertifiedReal::wrap(Node::$variant(self.node.clone(), rhs.node.clone()))
            }
        }
        impl $tr for CertifiedReal {
            type Output = CertifiedReal;
            fn $m(self, rhs: CertifiedReal) -> CertifiedReal {
                (&self).$m(&rhs)
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);

impl Div for &CertifiedReal {
    type Output = CertifiedReal;
    fn div(self, rhs: &CertifiedReal) -> CertifiedReal {
        if let (Node::Exact(a), Node::Exact(b)) = (self.node.as_ref(), rhs.node.as_ref()) {
            if !b.is_zero() {
                return CertifiedReal::from_rational(a / b);
            }
        }
        CertifiedReal::wrap(Node::Div(self.node.clone(), rhs.node.clone()))
    }
}

impl Div for CertifiedReal {
    type Output = CertifiedReal;
    fn div(self, rhs: CertifiedReal) -> CertifiedReal {
        &self / &rhs
    }
}

impl Neg for &CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        match self.node.as_ref() {
            Node::Exact(a) => CertifiedReal::from_rational(-a.clone()),
            _ => CertifiedReal::wrap(Node::Neg(self.node.clone())),
        }
    }
}

impl From<i64> for CertifiedReal {
    fn from(v: i64) -> Self {
        CertifiedReal::from_int(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn pi_brackets_known_digits() {
        let (lo, hi) = CertifiedReal::pi().enclosure(200).unwrap();
        let lower = rat(314159265, 100000000);
        let upper = rat(314159266, 100000000);
        assert!(lo > lower && hi < upper);
        assert!(&hi - &lo < rat(1, 1 << 40));
    }

    #[test]
    fn ceil_examples() {
        let fixed = CertifiedReal::interval(rat(31, 10), rat(32, 10)).unwrap();
        assert_eq!(fixed.certified_ceil().unwrap(), BigInt::from(4));
        // 3 - 2^-100 * sqrt(pi) straddles 3 at the starting precision
        let tiny = CertifiedReal::from_rational(BigRational::new(1.into(), BigInt::one() << 100));
        let x = &CertifiedReal::from_int(3) - &(&tiny * &CertifiedReal::pi().sqrt());
        assert_eq!(x.certified_ceil().unwrap(), BigInt::from(3));
        assert_eq!(x.certified_floor().unwrap(), BigInt::from(2));
    }

    #[test]
    fn unresolvable_interval_exhausts() {
        let fixed = CertifiedReal::interval(rat(29999, 10000), rat(30001, 10000)).unwrap();
        assert!(matches!(
            fixed.certified_ceil(),
            Err(MemcapError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn exact_square_roots() {
        let four = CertifiedReal::from_int(4).sqrt();
        assert_eq!(four.certified_ceil().unwrap(), BigInt::from(2));
        let q = CertifiedReal::from_rational(rat(9, 16)).sqrt();
        assert_eq!(q.enclosure(64).unwrap(), (rat(3, 4), rat(3, 4)));
    }

    #[test]
    fn sqrt_pi_value() {
        let s = CertifiedReal::pi().sqrt();
        assert!((s.to_f64() - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(
            s.cmp_rational(&rat(17724538, 10000000)).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&rat(-1, 3), 3, false), "-0.334");
        assert_eq!(decimal_string(&rat(1, 3), 3, true), "0.334");
        assert_eq!(decimal_string(&rat(5, 1), 2, false), "5.00");
    }
}
