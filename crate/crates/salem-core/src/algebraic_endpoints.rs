//! Exact endpoints `s ± r^(n/m)` with a decidable total order.
//!
//! Canonical form: the radical is stored as `r^(1/m)` with `m` minimal, i.e.
//! `r` is not a perfect `j`-th power for any divisor `j > 1` of `m`; when
//! `m = 1` the radical is folded into `s`. A positive real has exactly one
//! such form, so two values are equal iff their canonical forms agree: a
//! nontrivial relation `σ₁a − σ₂b = d` between two irrational real radicals
//! and `1` would force `a/b` to be rational (linear independence of real
//! radicals over ℚ), which the uniqueness of the minimal form rules out.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::enclosure::Iv;
use crate::error::{Result, SalemError};
use crate::rat::{exact_root_q, fmt_q, iroot, parse_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderResult {
    LT,
    EQ,
    GT,
}

impl From<Ordering> for OrderResult {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => OrderResult::LT,
            Ordering::Equal => OrderResult::EQ,
            Ordering::Greater => OrderResult::GT,
        }
    }
}

impl From<OrderResult> for Ordering {
    fn from(o: OrderResult) -> Self {
        match o {
            OrderResult::LT => Ordering::Less,
            OrderResult::EQ => Ordering::Equal,
            OrderResult::GT => Ordering::Greater,
        }
    }
}

#[derive(Clone)]
pub struct EValue {
    s: Q,
    neg: bool,
    r: Q,
    m: u32,
    enc: Iv,
}

const CACHE_BITS: u64 = 64;

impl EValue {
    pub fn rational(s: Q) -> EValue {
        let enc = Iv::from_q(&s);
        EValue { s, neg: false, r: Q::zero(), m: 1, enc }
    }

    pub fn zero() -> EValue {
        EValue::rational(Q::zero())
    }

    pub fn one() -> EValue {
        EValue::rational(Q::one())
    }

    /// `s + r^(n/m)`.
    pub fn new(s: Q, r: Q, n: u32, m: u32) -> Result<EValue> {
        EValue::signed(s, false, r, n, m)
    }

    /// `s − r^(n/m)` when `neg`, else `s + r^(n/m)`.
    pub fn signed(s: Q, neg: bool, r: Q, n: u32, m: u32) -> Result<EValue> {
        if m == 0 {
            return Err(SalemError::invalid("root index m must be >= 1"));
        }
        if r.is_negative() {
            return Err(SalemError::invalid("radicand r must be >= 0"));
        }
        if r.is_zero() {
            return Ok(EValue::rational(s));
        }
        if n == 0 {
            let s = if neg { s - Q::one() } else { s + Q::one() };
            return Ok(EValue::rational(s));
        }
        let g = n.gcd(&m);
        let (n, m) = (n / g, m / g);
        let r = Pow::pow(&r, n);
        Ok(EValue::canonical(s, neg, r, m))
    }

    fn canonical(s: Q, neg: bool, r: Q, m: u32) -> EValue {
        if r.is_zero() {
            return EValue::rational(s);
        }
        if m == 1 {
            return EValue::rational(if neg { s - r } else { s + r });
        }
        // largest divisor j of m with r a perfect j-th power
        let mut divs: Vec<u32> = (1..=m).filter(|j| m % j == 0).collect();
        divs.reverse();
        for j in divs {
            if j == 1 {
                break;
            }
            if let Some(root) = exact_root_q(&r, j) {
                let m2 = m / j;
                if m2 == 1 {
                    let s = if neg { s - root } else { s + root };
                    return EValue::rational(s);
                }
                return EValue::finish(s, neg, root, m2);
            }
        }
        EValue::finish(s, neg, r, m)
    }

    fn finish(s: Q, neg: bool, r: Q, m: u32) -> EValue {
        let mut v = EValue { s, neg, r, m, enc: Iv::ZERO };
        let (lo, hi) = v.refine_interval(CACHE_BITS);
        v.enc = Iv::from_q(&lo).hull(Iv::from_q(&hi));
        v
    }

    pub fn s(&self) -> &Q {
        &self.s
    }

    pub fn r(&self) -> &Q {
        &self.r
    }

    /// Numerator exponent of the canonical form (1, or 0 for rationals).
    pub fn n(&self) -> u32 {
        if self.r.is_zero() {
            0
        } else {
            1
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn radical_negative(&self) -> bool {
        self.neg
    }

    pub fn is_rational(&self) -> bool {
        self.r.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        if self.is_rational() {
            Some(&self.s)
        } else {
            None
        }
    }

    /// Cached outward f64 enclosure.
    pub fn enclosure(&self) -> Iv {
        self.enc
    }

    pub fn approx(&self) -> f64 {
        self.enc.mid()
    }

    /// Rational interval of width at most `2^-precision`; nested in `precision`.
    pub fn refine_interval(&self, precision: u64) -> (Q, Q) {
        if self.is_rational() {
            return (self.s.clone(), self.s.clone());
        }
        let num: BigUint = self.r.numer().magnitude().clone();
        let den: BigUint = self.r.denom().magnitude().clone();
        let y = (num << (self.m as u64 * precision) as usize) / den;
        let z = iroot(&y, self.m);
        let scale = BigInt::one() << precision as usize;
        let lo = BigRational::new(BigInt::from(z.clone()), scale.clone());
        let hi = BigRational::new(BigInt::from(z) + 1, scale);
        if self.neg {
            (&self.s - hi, &self.s - lo)
        } else {
            (&self.s + lo, &self.s + hi)
        }
    }

    /// `c·a + t` for `c >= 0`.
    pub fn affine_image(&self, c: &Q, t: &Q) -> Result<EValue> {
        if c.is_negative() {
            return Err(SalemError::invalid("affine_image needs c >= 0"));
        }
        if c.is_zero() {
            return Ok(EValue::rational(t.clone()));
        }
        let s = c * &self.s + t;
        if self.is_rational() {
            return Ok(EValue::rational(s));
        }
        let r = Pow::pow(c, self.m) * &self.r;
        Ok(EValue::canonical(s, self.neg, r, self.m))
    }

    pub fn add_q(&self, t: &Q) -> EValue {
        let mut v = self.clone();
        v.s += t;
        v.enc = if v.is_rational() {
            Iv::from_q(&v.s)
        } else {
            let (lo, hi) = v.refine_interval(CACHE_BITS);
            Iv::from_q(&lo).hull(Iv::from_q(&hi))
        };
        v
    }

    /// `x·a + y·b` when the result stays in the field (at most one radical).
    pub fn lin(a: &EValue, x: &Q, b: &EValue, y: &Q) -> Option<EValue> {
        let s = x * &a.s + y * &b.s;
        let ka = if a.neg { -x.clone() } else { x.clone() };
        let kb = if b.neg { -y.clone() } else { y.clone() };
        let (kappa, r, m) = match (a.is_rational() || x.is_zero(), b.is_rational() || y.is_zero()) {
            (true, true) => return Some(EValue::rational(s)),
            (false, true) => (ka, a.r.clone(), a.m),
            (true, false) => (kb, b.r.clone(), b.m),
            (false, false) => {
                if a.r != b.r || a.m != b.m {
                    return None;
                }
                (ka + kb, a.r.clone(), a.m)
            }
        };
        if kappa.is_zero() {
            return Some(EValue::rational(s));
        }
        let neg = kappa.is_negative();
        let r = Pow::pow(&kappa.abs(), m) * r;
        Some(EValue::canonical(s, neg, r, m))
    }

    pub fn neg(&self) -> EValue {
        EValue::lin(self, &-Q::one(), &EValue::zero(), &Q::zero()).expect("negation stays in field")
    }

    /// `b − a` when representable.
    pub fn diff(b: &EValue, a: &EValue) -> Option<EValue> {
        EValue::lin(b, &Q::one(), a, &-Q::one())
    }

    /// `(a + b)/2` when representable.
    pub fn midpoint(a: &EValue, b: &EValue) -> Option<EValue> {
        let h = Q::new(BigInt::one(), BigInt::from(2));
        EValue::lin(a, &h, b, &h)
    }

    pub fn cmp_q(&self, x: &Q) -> Ordering {
        compare(self, &EValue::rational(x.clone())).into()
    }

    /// Exact three-way order, terminating on all inputs.
    pub fn compare(&self, other: &EValue) -> OrderResult {
        compare(self, other)
    }

    fn same_form(&self, o: &EValue) -> bool {
        self.s == o.s && self.r == o.r && self.m == o.m && (self.r.is_zero() || self.neg == o.neg)
    }
}

pub fn compare(a: &EValue, b: &EValue) -> OrderResult {
    if a.same_form(b) {
        return OrderResult::EQ;
    }
    if a.is_rational() && b.is_rational() {
        return a.s.cmp(&b.s).into();
    }
    if a.enc.hi < b.enc.lo {
        return OrderResult::LT;
    }
    if a.enc.lo > b.enc.hi {
        return OrderResult::GT;
    }
    // distinct canonical forms are distinct reals, so refinement terminates
    let mut p = 2 * CACHE_BITS;
    loop {
        let (al, ah) = a.refine_interval(p);
        let (bl, bh) = b.refine_interval(p);
        if ah < bl {
            return OrderResult::LT;
        }
        if al > bh {
            return OrderResult::GT;
        }
        p *= 2;
    }
}

impl PartialEq for EValue {
    fn eq(&self, o: &EValue) -> bool {
        self.same_form(o)
    }
}

impl Eq for EValue {}

impl Hash for EValue {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.s.hash(h);
        self.r.hash(h);
        self.m.hash(h);
        (self.neg && !self.r.is_zero()).hash(h);
    }
}

impl PartialOrd for EValue {
    fn partial_cmp(&self, o: &EValue) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for EValue {
    fn cmp(&self, o: &EValue) -> Ordering {
        compare(self, o).into()
    }
}

impl fmt::Debug for EValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for EValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", fmt_q(&self.s));
        }
        let op = if self.neg { '-' } else { '+' };
        write!(f, "{} {} ({})^(1/{})", fmt_q(&self.s), op, fmt_q(&self.r), self.m)
    }
}

impl From<Q> for EValue {
    fn from(s: Q) -> Self {
        EValue::rational(s)
    }
}

#[derive(Serialize, Deserialize)]
struct EValueWire {
    s: String,
    r: String,
    n: u32,
    m: u32,
    #[serde(default, skip_serializing_if = "is_plus")]
    sign: i8,
}

fn is_plus(x: &i8) -> bool {
    *x >= 0
}

impl Serialize for EValue {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        EValueWire {
            s: fmt_q(&self.s),
            r: fmt_q(&self.r),
            n: self.n(),
            m: self.m,
            sign: if self.neg && !self.is_rational() { -1 } else { 1 },
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for EValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = EValueWire::deserialize(d)?;
        let s = parse_q(&w.s).map_err(serde::de::Error::custom)?;
        let r = parse_q(&w.r).map_err(serde::de::Error::custom)?;
        EValue::signed(s, w.sign < 0, r, w.n, w.m).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of `EValue::new`.
pub fn make_evalue(s: Q, r: Q, n: u32, m: u32) -> Result<EValue> {
    EValue::new(s, r, n, m)
}

pub fn refine_interval(a: &EValue, precision: u64) -> (Q, Q) {
    a.refine_interval(precision)
}

pub fn affine_image(a: &EValue, c: &Q, t: &Q) -> Result<EValue> {
    a.affine_image(c, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qi};

    fn ev(s: Q, r: Q, n: u32, m: u32) -> EValue {
        EValue::new(s, r, n, m).unwrap()
    }

    #[test]
    fn zero_radicand_and_perfect_powers() {
        assert_eq!(ev(q(1, 3), qi(0), 0, 1), EValue::rational(q(1, 3)));
        let v = ev(qi(0), qi(4), 2, 4);
        assert_eq!(v.as_rational(), Some(&qi(2)));
        assert_eq!(ev(qi(0), qi(64), 1, 4), ev(qi(0), qi(8), 1, 2));
        assert!(EValue::new(qi(0), qi(-1), 1, 2).is_err());
        assert!(EValue::new(qi(0), qi(1), 1, 0).is_err());
        let one = EValue::signed(qi(0), false, q(2, 3), 1, 1).unwrap();
        assert_eq!(one.as_rational(), Some(&q(2, 3)));
        assert_eq!(EValue::signed(qi(1), true, qi(1), 1, 1).unwrap(), EValue::zero());
    }

    #[test]
    fn derived_value() {
        let v = ev(q(1, 2), q(1, 5), 5, 2);
        let (lo, hi) = v.refine_interval(40);
        // 1/2 + 5^(-5/2) = 0.5178885438199983...
        assert!(lo <= q(5178885438199984, 10_000_000_000_000_000));
        assert!(hi >= q(5178885438199982, 10_000_000_000_000_000));
    }

    #[test]
    fn refine_nested_and_narrow() {
        let v = ev(q(1, 7), q(1, 3), 3, 2);
        let mut prev: Option<(Q, Q)> = None;
        for p in [4u64, 8, 20, 33, 64, 100] {
            let (lo, hi) = v.refine_interval(p);
            assert!(&hi - &lo <= crate::rat::pow2(-(p as i64)));
            if let Some((pl, ph)) = &prev {
                assert!(*pl <= lo && hi <= *ph);
            }
            prev = Some((lo, hi));
        }
        let r2 = ev(qi(0), qi(2), 1, 2).refine_interval(4);
        assert!(r2.0 <= q(1414, 1000) && r2.1 >= q(1415, 1000));
    }

    #[test]
    fn order_examples() {
        let a = ev(q(1, 2), q(1, 4), 1, 2);
        assert_eq!(compare(&a, &EValue::one()), OrderResult::EQ);
        let s2 = ev(qi(0), qi(2), 1, 2);
        let s3 = ev(qi(0), qi(3), 1, 2);
        assert_eq!(compare(&s2, &s3), OrderResult::LT);
        assert_eq!(compare(&s3, &s2), OrderResult::GT);
        assert_eq!(compare(&s2, &s2.clone()), OrderResult::EQ);
        // 8^(1/6) = 2^(3/6) = 2^(1/2)
        assert_eq!(compare(&s2, &ev(qi(0), qi(8), 1, 6)), OrderResult::EQ);
        assert_eq!(compare(&s2, &ev(qi(0), qi(2), 3, 6)), OrderResult::EQ);
    }

    #[test]
    fn very_close_values_are_separated() {
        // sqrt(10^20 + 1) vs 10^10 + 1/(2·10^10)
        let a = ev(qi(0), BigRational::from_integer(BigInt::from(10).pow(20u32) + 1), 1, 2);
        let b = EValue::rational(BigRational::from_integer(BigInt::from(10).pow(10u32)) + q(1, 20_000_000_000));
        assert_eq!(compare(&a, &b), OrderResult::LT);
    }

    #[test]
    fn affine_examples() {
        let a = ev(qi(0), qi(2), 1, 2);
        assert_eq!(a.affine_image(&qi(1), &qi(0)).unwrap(), a);
        assert_eq!(a.affine_image(&qi(3), &qi(1)).unwrap(), ev(qi(1), qi(18), 1, 2));
        let b = ev(q(1, 2), q(1, 5), 1, 2);
        assert_eq!(b.affine_image(&q(1, 2), &q(1, 4)).unwrap(), ev(q(1, 2), q(1, 20), 1, 2));
        assert!(a.affine_image(&qi(-1), &qi(0)).is_err());
        let c = q(3, 7);
        let t = q(-2, 5);
        let img = b.affine_image(&c, &t).unwrap();
        let back = img.affine_image(&(Q::one() / &c), &(-&t / &c)).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn lin_and_midpoint() {
        let lo = ev(q(1, 3), qi(5), 1, 2).neg().add_q(&q(2, 3));
        let hi = ev(q(1, 3), qi(5), 1, 2);
        let mid = EValue::midpoint(&lo, &hi).unwrap();
        assert!(mid.is_rational());
        let w = EValue::diff(&hi, &lo).unwrap();
        assert!(!w.is_rational());
        let other = ev(qi(0), qi(3), 1, 2);
        assert!(EValue::midpoint(&hi, &other).is_none());
    }

    #[test]
    fn json_roundtrip() {
        let v = EValue::signed(q(1, 3), true, q(2, 5), 1, 3).unwrap();
        let js = serde_json::to_string(&v).unwrap();
        assert!(js.contains("\"sign\":-1"));
        let back: EValue = serde_json::from_str(&js).unwrap();
        assert_eq!(back, v);
        let plain = serde_json::to_string(&EValue::rational(q(1, 2))).unwrap();
        assert_eq!(plain, r#"{"s":"1/2","r":"0","n":0,"m":1}"#);
    }
}
