//! Digit codec `d − 1 + 1/15 + Σ 2^(−2i−1)·b_i`.
//!
//! Binary positions count from 0 after the point. Data bits sit at even
//! positions; `1/15 = 0.000100010001…` fills the odd positions with 0 at
//! `≡ 1 (mod 4)` and 1 at `≡ 3 (mod 4)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Result, SalemError};
use crate::rat::{pow2, Q};

fn check_d(d: u64) -> Result<()> {
    if d == 0 {
        return Err(SalemError::invalid("d must be >= 1"));
    }
    Ok(())
}

pub fn weihrauch_encode(bits: &[u8], d: u64) -> Result<Q> {
    check_d(d)?;
    if bits.iter().any(|&b| b > 1) {
        return Err(SalemError::invalid("bits must be 0/1"));
    }
    let mut v = Q::from_integer(BigInt::from(d - 1)) + Q::new(BigInt::one(), BigInt::from(15));
    for (i, &b) in bits.iter().enumerate() {
        if b == 1 {
            v += pow2(-2 * i as i64 - 1);
        }
    }
    Ok(v)
}

/// Binary digit at position `pos` of `x ∈ [0,1)`.
pub fn binary_digit(x: &Q, pos: u64) -> u8 {
    let y = x * pow2(pos as i64 + 1);
    let f = y.floor().to_integer();
    if f.is_odd() {
        1
    } else {
        0
    }
}

/// Guard digit expected at an odd position.
pub fn guard_digit(pos: u64) -> u8 {
    if pos % 4 == 3 {
        1
    } else {
        0
    }
}

pub fn weihrauch_decode(value: &Q, count: usize, d: u64) -> Result<Vec<u8>> {
    check_d(d)?;
    let frac = value - Q::from_integer(BigInt::from(d - 1));
    if frac < Q::zero() || frac >= Q::one() {
        return Err(SalemError::NonCodeword(format!("fractional part {frac} outside [0,1)")));
    }
    let span = 2 * count as u64 + 4;
    for pos in (1..span).step_by(2) {
        let got = binary_digit(&frac, pos);
        if got != guard_digit(pos) {
            return Err(SalemError::NonCodeword(format!(
                "guard digit at position {pos} is {got}, expected {}",
                guard_digit(pos)
            )));
        }
    }
    Ok((0..count as u64).map(|i| binary_digit(&frac, 2 * i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;

    #[test]
    fn examples() {
        assert_eq!(weihrauch_encode(&[], 1).unwrap(), q(1, 15));
        assert_eq!(weihrauch_encode(&[1], 1).unwrap(), q(17, 30));
        assert_eq!(weihrauch_decode(&q(1, 15), 0, 1).unwrap(), Vec::<u8>::new());
        assert!(matches!(weihrauch_decode(&q(1, 4), 0, 1), Err(SalemError::NonCodeword(_))));
    }

    #[test]
    fn round_trip() {
        for len in 0..=8usize {
            for mask in 0..(1u32 << len) {
                let bits: Vec<u8> = (0..len).map(|i| ((mask >> i) & 1) as u8).collect();
                for d in 1..=3 {
                    let v = weihrauch_encode(&bits, d).unwrap();
                    assert_eq!(weihrauch_decode(&v, len, d).unwrap(), bits);
                    let frac = &v - Q::from_integer(BigInt::from(d - 1));
                    for pos in (1..40).step_by(2) {
                        assert_eq!(binary_digit(&frac, pos), guard_digit(pos));
                    }
                }
            }
        }
    }
}
