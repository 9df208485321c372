//! Exact arithmetic: dyadic rationals, bit utilities and certified reals.

pub mod bits;
pub mod certified;
pub mod dyadic;

pub use bits::{bin_slice, bit_len, pack_slots};
pub use certified::{precision_cap, rat_to_f64, CertifiedReal};
pub use dyadic::Dyadic;
pub use num_bigint::BigInt;
pub use num_rational::BigRational;

use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// JSON form `{"p": "<int>", "q": "<int>"}` for rationals.
pub mod rational_json {
    use super::*;
    use std::str::FromStr;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        p: String,
        q: String,
    }

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        Repr { p: v.numer().to_string(), q: v.denom().to_string() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let r = Repr::deserialize(d)?;
        let p = BigInt::from_str(&r.p).map_err(serde::de::Error::custom)?;
        let q = BigInt::from_str(&r.q).map_err(serde::de::Error::custom)?;
        if q == BigInt::from(0) {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(BigRational::new(p, q))
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn rat_int<T: Into<BigInt>>(v: T) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `2^k` as a rational.
pub fn rat_pow2(k: i64) -> BigRational {
    let p = BigInt::one() << (k.unsigned_abs() as usize);
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}
