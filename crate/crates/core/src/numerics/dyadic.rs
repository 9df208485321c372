//! Exact dyadic rationals `num / 2^exp`.
//!
//! Values are kept canonical: either `num` is odd or `exp == 0`. Equality is
//! therefore structural and hashing/ordering are value-based.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::bits::bit_len;
use crate::error::{MemcapError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Dyadic { num: v.into(), exp: 0 }
    }

    /// `2^k` for any signed `k`.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            Dyadic::from_int(BigInt::one() << (k as usize))
        } else {
            Dyadic { num: BigInt::one(), exp: (-k) as u32 }
        }
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        if self.exp == 0 {
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp as u64) as u32;
        if tz > 0 {
            self.num >>= tz as usize;
            self.exp -= tz;
        }
    }

    /// `LEN(|num|) + LEN(exp)`.
    pub fn bit_complexity(&self) -> u64 {
        bit_len(&self.num.abs()) + bit_len(&BigInt::from(self.exp))
    }

    pub fn relu(&self) -> Dyadic {
        if self.num.is_negative() {
            Dyadic::zero()
        } else {
            self.clone()
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if k >= 0 {
            let k = k as u32;
            if self.exp >= k {
                Dyadic::new(self.num.clone(), self.exp - k)
            } else {
                Dyadic { num: &self.num << ((k - self.exp) as usize), exp: 0 }
            }
        } else {
            Dyadic::new(self.num.clone(), self.exp + (-k) as u32)
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.exp == 0 {
            self.num.clone()
        } else {
            // arithmetic shift rounds toward negative infinity
            &self.num >> (self.exp as usize)
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << (self.exp as usize))
    }

    /// Exact conversion; fails when the denominator is not a power of two.
    pub fn from_rational(q: &BigRational) -> Result<Dyadic> {
        let den = q.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> (tz as usize)) != BigInt::one() {
            return Err(MemcapError::Range(format!("{q} is not dyadic")));
        }
        Ok(Dyadic::new(q.numer().clone(), tz as u32))
    }

    /// Largest multiple of `2^-bits` not above `q`.
    pub fn floor_rational(q: &BigRational, bits: u32) -> Dyadic {
        let scaled = q * BigRational::from_integer(BigInt::one() << (bits as usize));
        Dyadic::new(scaled.floor().to_integer(), bits)
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_string().parse::<f64>().unwrap_or(f64::NAN);
        n / 2f64.powi(self.exp as i32)
    }

    /// Exact decimal expansion.
    pub fn to_decimal_string(&self) -> String {
        if self.exp == 0 {
            return self.num.to_string();
        }
        let scaled = &self.num * num_traits::pow(BigInt::from(5), self.exp as usize);
        let neg = scaled.is_negative();
        let digits = scaled.abs().to_string();
        let e = self.exp as usize;
        let (int_part, frac_part) = if digits.len() > e {
            let (a, b) = digits.split_at(digits.len() - e);
            (a.to_string(), b.to_string())
        } else {
            ("0".to_string(), format!("{}{}", "0".repeat(e - digits.len()), digits))
        };
        format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac_part)
    }
}

impl FromStr for Dyadic {
    type Err = MemcapError;

    /// Parses a decimal string such as `-1.25`; rejects values like `0.1`
    /// whose denominator is not a power of two.
    fn from_str(s: &str) -> Result<Dyadic> {
        let t = s.trim();
        let err = || MemcapError::Parse(format!("invalid decimal '{s}'"));
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (ip, fp) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        if (ip.is_empty() && fp.is_empty())
            || !ip.chars().all(|c| c.is_ascii_digit())
            || !fp.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{ip}{fp}");
        let mut mant = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        if neg {
            mant = -mant;
        }
        let k = fp.len();
        let five_k = num_traits::pow(BigInt::from(5), k);
        let (q, r) = mant.div_rem(&five_k);
        if !r.is_zero() {
            return Err(MemcapError::Parse(format!("'{s}' is not a dyadic rational")));
        }
        Ok(Dyadic::new(q, k as u32))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.exp.cmp(&other.exp) {
            Ordering::Equal => self.num.cmp(&other.num),
            Ordering::Less => (&self.num << ((other.exp - self.exp) as usize)).cmp(&other.num),
            Ordering::Greater => self.num.cmp(&(&other.num << ((self.exp - other.exp) as usize))),
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, u32) {
    match a.exp.cmp(&b.exp) {
        Ordering::Equal => (a.num.clone(), b.num.clone(), a.exp),
        Ordering::Less => (&a.num << ((b.exp - a.exp) as usize), b.num.clone(), b.exp),
        Ordering::Greater => (a.num.clone(), &b.num << ((a.exp - b.exp) as usize), a.exp),
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (a, b, e) = aligned(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = aligned(self, rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // product of canonical values is canonical unless an exponent is zero
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -&self.num, exp: self.exp }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    num: String,
    exp: u32,
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DyadicRepr { num: self.num.to_string(), exp: self.exp }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DyadicRepr::deserialize(d)?;
        let num = BigInt::from_str(&r.num).map_err(serde::de::Error::custom)?;
        Ok(Dyadic::new(num, r.exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let d = Dyadic::new(BigInt::from(12), 3);
        assert_eq!(d.num(), &BigInt::from(3));
        assert_eq!(d.exp(), 1);
        assert_eq!(Dyadic::new(BigInt::zero(), 9).exp(), 0);
    }

    #[test]
    fn three_eighths_complexity() {
        let d = Dyadic::new(BigInt::from(3), 3);
        assert_eq!(d.bit_complexity(), 4);
    }

    #[test]
    fn parse_and_print() {
        let d: Dyadic = "1.25".parse().unwrap();
        assert_eq!(d, Dyadic::new(BigInt::from(5), 2));
        assert_eq!(d.to_decimal_string(), "1.25");
        assert_eq!("-0.375".parse::<Dyadic>().unwrap().to_decimal_string(), "-0.375");
        assert!("0.1".parse::<Dyadic>().is_err());
        assert!("abc".parse::<Dyadic>().is_err());
        assert_eq!("7".parse::<Dyadic>().unwrap(), Dyadic::from_int(7));
    }

    #[test]
    fn floor_negative() {
        let d: Dyadic = "-1.5".parse().unwrap();
        assert_eq!(d.floor(), BigInt::from(-2));
    }

    #[test]
    fn json_shape() {
        let d = Dyadic::new(BigInt::from(3), 3);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"num":"3","exp":3}"#);
        let back: Dyadic = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
