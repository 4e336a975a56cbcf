//! Rational helpers shared by every module: parsing, printing, integer roots.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Result, SalemError};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || SalemError::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_q_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_q(s).map_err(serde::de::Error::custom)).collect()
    }
}

pub mod serde_q_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        x.as_ref().map(fmt_q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Q>, D::Error> {
        let v = Option::<String>::deserialize(d)?;
        v.map(|s| parse_q(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

/// `BigUint` as a decimal string.
pub mod serde_big {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub mod serde_big_vec {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
        xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigUint>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()
    }
}

/// Exact `floor(x^(1/m))` for `x >= 0`.
pub fn iroot(x: &BigUint, m: u32) -> BigUint {
    if m == 1 {
        return x.clone();
    }
    x.nth_root(m)
}

/// `Some(y)` when `x = y^m` exactly.
pub fn exact_root_uint(x: &BigUint, m: u32) -> Option<BigUint> {
    let y = iroot(x, m);
    if y.pow(m) == *x {
        Some(y)
    } else {
        None
    }
}

/// `Some(y)` with `y >= 0` and `y^m = x`, for rational `x >= 0`.
pub fn exact_root_q(x: &Q, m: u32) -> Option<Q> {
    let n = x.numer().to_biguint()?;
    let d = x.denom().to_biguint()?;
    let rn = exact_root_uint(&n, m)?;
    let rd = exact_root_uint(&d, m)?;
    Some(BigRational::new(BigInt::from(rn), BigInt::from(rd)))
}

pub fn floor_q(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_q(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn pow2(e: i64) -> Q {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << (e as usize))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

/// Dyadic rational `k / 2^p`.
pub fn dyadic(k: BigInt, p: u64) -> Q {
    BigRational::new(k, BigInt::one() << (p as usize))
}

/// Exact rational value of a finite float.
pub fn q_from_f64(x: f64) -> Q {
    BigRational::from_float(x).expect("finite float")
}

/// Largest float `<= x`.
pub fn f64_down(x: &Q) -> f64 {
    let f = x.to_f64().unwrap_or(f64::NAN);
    if f.is_nan() {
        return if x.is_negative() { f64::NEG_INFINITY } else { f64::MAX };
    }
    if f.is_infinite() {
        return if f > 0.0 { f64::MAX } else { f64::NEG_INFINITY };
    }
    if q_from_f64(f) <= *x {
        f
    } else {
        f.next_down()
    }
}

/// Smallest float `>= x`.
pub fn f64_up(x: &Q) -> f64 {
    let f = x.to_f64().unwrap_or(f64::NAN);
    if f.is_nan() {
        return if x.is_negative() { f64::MIN } else { f64::INFINITY };
    }
    if f.is_infinite() {
        return if f > 0.0 { f64::INFINITY } else { f64::MIN };
    }
    if q_from_f64(f) >= *x {
        f
    } else {
        f.next_up()
    }
}

pub fn to_uint(x: &BigInt) -> BigUint {
    match x.sign() {
        Sign::Minus => BigUint::zero(),
        _ => x.magnitude().clone(),
    }
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// `floor(log2(x))` for positive `x`.
pub fn floor_log2(x: &Q) -> i64 {
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    let mut e = n.bits() as i64 - d.bits() as i64;
    // 2^e <= x < 2^(e+1) after at most one correction
    if pow2(e) > x.abs() {
        e -= 1;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_q("6/4").unwrap(), q(3, 2));
        assert_eq!(parse_q("-7").unwrap(), qi(-7));
        assert_eq!(fmt_q(&q(-3, 6)), "-1/2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("0.5").is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(exact_root_q(&q(16, 81), 4), Some(q(2, 3)));
        assert_eq!(exact_root_q(&q(2, 1), 2), None);
        assert_eq!(iroot(&BigUint::from(26u32), 3), BigUint::from(2u32));
    }

    #[test]
    fn float_rounding() {
        let third = q(1, 3);
        assert!(q_from_f64(f64_down(&third)) <= third);
        assert!(q_from_f64(f64_up(&third)) >= third);
        assert_eq!(f64_down(&q(1, 2)), 0.5);
    }

    #[test]
    fn log2_floor() {
        assert_eq!(floor_log2(&q(1, 1)), 0);
        assert_eq!(floor_log2(&q(3, 1)), 1);
        assert_eq!(floor_log2(&q(1, 3)), -2);
        assert_eq!(floor_log2(&q(1, 4)), -2);
    }
}
