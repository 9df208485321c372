use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{MemcapError, Result};

/// Binary length of a nonnegative integer, with `LEN(0) = 1`.
pub fn bit_len(x: &BigInt) -> u64 {
    if x.is_zero() {
        1
    } else {
        x.bits()
    }
}

/// Bits `i..=j` (1-based, counted from the most significant end) of `x`
/// written with exactly `total_bits` digits.
pub fn bin_slice(x: &BigInt, i: u32, j: u32, total_bits: u32) -> Result<BigInt> {
    if x.is_negative() {
        return Err(MemcapError::Range("bin_slice of a negative value".into()));
    }
    if i < 1 || i > j || j > total_bits {
        return Err(MemcapError::Range(format!(
            "slice {i}..={j} outside 1..={total_bits}"
        )));
    }
    if x.bits() > total_bits as u64 {
        return Err(MemcapError::Range(format!("{x} does not fit in {total_bits} bits")));
    }
    let width = j - i + 1;
    let shifted = x >> ((total_bits - j) as usize);
    let mask = (BigInt::one() << (width as usize)) - 1;
    Ok(shifted & mask)
}

/// Packs `slots`, each `width` bits wide, most significant slot first.
pub fn pack_slots(slots: &[BigInt], width: u32) -> BigInt {
    slots
        .iter()
        .fold(BigInt::zero(), |acc, s| (acc << (width as usize)) + s)
}

/// `ceil(log2(x))` for a positive integer.
pub fn ceil_log2(x: &BigInt) -> u64 {
    (x - 1u32).bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_examples() {
        let x = BigInt::from(13);
        assert_eq!(bin_slice(&x, 1, 2, 4).unwrap(), BigInt::from(3));
        assert_eq!(bin_slice(&x, 4, 4, 4).unwrap(), BigInt::from(1));
        assert_eq!(bin_slice(&x, 1, 4, 4).unwrap(), BigInt::from(13));
        assert!(bin_slice(&x, 3, 2, 4).is_err());
        assert!(bin_slice(&x, 1, 5, 4).is_err());
        assert!(bin_slice(&x, 0, 2, 4).is_err());
    }

    #[test]
    fn lengths() {
        assert_eq!(bit_len(&BigInt::zero()), 1);
        assert_eq!(bit_len(&BigInt::from(1)), 1);
        assert_eq!(bit_len(&BigInt::from(8)), 4);
        assert_eq!(ceil_log2(&BigInt::from(1)), 0);
        assert_eq!(ceil_log2(&BigInt::from(8)), 3);
        assert_eq!(ceil_log2(&BigInt::from(9)), 4);
    }

    #[test]
    fn packing() {
        let p = pack_slots(&[BigInt::from(2), BigInt::from(3)], 3);
        assert_eq!(p, BigInt::from(0b010_011));
    }
}
