//! Outward-rounded f64 intervals.
//!
//! Bounds are rounded outward; exact operations stay exact.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::rat::{f64_down, f64_up, q_from_f64, Q};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Iv {
    pub lo: f64,
    pub hi: f64,
}

fn dn(x: f64) -> f64 {
    if x == 0.0 {
        -f64::from_bits(1)
    } else {
        x.next_down()
    }
}

fn up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        x.next_up()
    }
}

// 0 * inf is taken as 0 (the zero is exact in all our uses)
fn pmul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

// Directed rounding emulated with error-free transforms: the rounding error
// of a sum (TwoSum) or product (FMA) is exact, so its sign says which way
// the nearest result missed.
const TINY: f64 = 1e-290;

fn sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

fn add_dn(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::NEG_INFINITY } else { s };
    }
    if sum_err(a, b, s) < 0.0 {
        dn(s)
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::INFINITY } else { s };
    }
    if sum_err(a, b, s) > 0.0 {
        up(s)
    } else {
        s
    }
}

fn mul_dn(a: f64, b: f64) -> f64 {
    let p = pmul(a, b);
    if p == 0.0 && (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    if !p.is_finite() || p.abs() < TINY {
        return dn(p);
    }
    if a.mul_add(b, -p) < 0.0 {
        dn(p)
    } else {
        p
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    let p = pmul(a, b);
    if p == 0.0 && (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    if !p.is_finite() || p.abs() < TINY {
        return up(p);
    }
    if a.mul_add(b, -p) > 0.0 {
        up(p)
    } else {
        p
    }
}

// sign of a/b − q via the exact remainder a − q·b
fn div_dir(a: f64, b: f64, q: f64) -> f64 {
    let r = (-q).mul_add(b, a);
    if b > 0.0 {
        r
    } else {
        -r
    }
}

fn div_dn(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || q.abs() < TINY || a.abs() < TINY {
        return dn(q);
    }
    if div_dir(a, b, q) < 0.0 {
        dn(q)
    } else {
        q
    }
}

fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || q.abs() < TINY || a.abs() < TINY {
        return up(q);
    }
    if div_dir(a, b, q) > 0.0 {
        up(q)
    } else {
        q
    }
}

impl Iv {
    pub const ZERO: Iv = Iv { lo: 0.0, hi: 0.0 };
    pub const ONE: Iv = Iv { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Iv {
        debug_assert!(lo <= hi, "bad interval [{lo}, {hi}]");
        Iv { lo, hi }
    }

    pub fn pt(x: f64) -> Iv {
        Iv { lo: x, hi: x }
    }

    pub fn from_q(x: &Q) -> Iv {
        Iv { lo: f64_down(x), hi: f64_up(x) }
    }

    pub fn from_int(k: i64) -> Iv {
        let f = k as f64;
        if f as i64 == k && f.abs() < 9.0e15 {
            Iv::pt(f)
        } else {
            Iv { lo: dn(f), hi: up(f) }
        }
    }

    pub fn hull(self, o: Iv) -> Iv {
        Iv { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_q(&self, x: &Q) -> bool {
        let lo = if self.lo.is_finite() { Some(q_from_f64(self.lo)) } else { None };
        let hi = if self.hi.is_finite() { Some(q_from_f64(self.hi)) } else { None };
        lo.map_or(self.lo < 0.0, |l| l <= *x) && hi.map_or(self.hi > 0.0, |h| *x <= h)
    }

    pub fn width(&self) -> f64 {
        up(self.hi - self.lo)
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    /// Upper bound on `|x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound on `|x|` over the interval.
    pub fn mig(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    pub fn abs(self) -> Iv {
        Iv { lo: self.mig(), hi: self.mag() }
    }

    pub fn lo_q(&self) -> Q {
        q_from_f64(self.lo)
    }

    pub fn hi_q(&self) -> Q {
        q_from_f64(self.hi)
    }

    pub fn intersect(self, o: Iv) -> Iv {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        if lo <= hi {
            Iv { lo, hi }
        } else {
            // inconsistent enclosures cannot both be right; keep the first
            self
        }
    }

    pub fn sqr(self) -> Iv {
        let a = self.abs();
        Iv { lo: mul_dn(a.lo, a.lo).max(0.0), hi: mul_up(a.hi, a.hi) }
    }

    pub fn powi(self, n: u32) -> Iv {
        let mut r = Iv::ONE;
        let mut b = self;
        let mut e = n;
        let even = n % 2 == 0;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b;
            }
            e >>= 1;
            if e > 0 {
                b = b * b;
            }
        }
        if even {
            r.lo = r.lo.max(0.0);
        }
        r
    }

    pub fn recip(self) -> Iv {
        Iv::ONE / self
    }

    pub fn sqrt(self) -> Iv {
        let lo = if self.lo <= 0.0 { 0.0 } else { dn(self.lo.sqrt()).max(0.0) };
        Iv { lo, hi: up(self.hi.max(0.0).sqrt()) }
    }

    /// Widen symmetrically by `r >= 0`.
    pub fn inflate(self, r: f64) -> Iv {
        Iv { lo: dn(self.lo - r), hi: up(self.hi + r) }
    }

    pub fn exp(self) -> Iv {
        Iv { lo: exp_point(self.lo).lo, hi: exp_point(self.hi).hi }
    }

    /// Natural log; the lower end may be `-inf` when the interval touches 0.
    pub fn ln(self) -> Iv {
        assert!(self.hi > 0.0, "ln of nonpositive interval");
        let lo = if self.lo <= 0.0 { f64::NEG_INFINITY } else { ln_point(self.lo).lo };
        Iv { lo, hi: ln_point(self.hi).hi }
    }

    /// `(sin 2πt, cos 2πt)`.
    pub fn sincos_turns(self) -> (Iv, Iv) {
        let m = self.mid();
        let rad = up(up(self.hi - m).max(up(m - self.lo)));
        let frac = m - m.floor();
        let (s, c) = sincos_turn_point(frac);
        let slack = up(rad * 6.2831853071795873);
        let clamp = |x: Iv| Iv { lo: x.lo.max(-1.0), hi: x.hi.min(1.0) };
        (clamp(s.inflate(slack)), clamp(c.inflate(slack)))
    }
}

impl Add for Iv {
    type Output = Iv;
    fn add(self, o: Iv) -> Iv {
        Iv { lo: add_dn(self.lo, o.lo), hi: add_up(self.hi, o.hi) }
    }
}

impl Sub for Iv {
    type Output = Iv;
    fn sub(self, o: Iv) -> Iv {
        Iv { lo: add_dn(self.lo, -o.hi), hi: add_up(self.hi, -o.lo) }
    }
}

impl Neg for Iv {
    type Output = Iv;
    fn neg(self) -> Iv {
        Iv { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Iv {
    type Output = Iv;
    fn mul(self, o: Iv) -> Iv {
        let pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let lo = pairs.iter().map(|&(a, b)| mul_dn(a, b)).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|&(a, b)| mul_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Iv { lo, hi }
    }
}

impl Div for Iv {
    type Output = Iv;
    fn div(self, o: Iv) -> Iv {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return Iv { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
        }
        let pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let lo = pairs.iter().map(|&(a, b)| div_dn(a, b)).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|&(a, b)| div_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Iv { lo, hi }
    }
}

impl Mul<f64> for Iv {
    type Output = Iv;
    fn mul(self, o: f64) -> Iv {
        self * Iv::pt(o)
    }
}

impl Add<f64> for Iv {
    type Output = Iv;
    fn add(self, o: f64) -> Iv {
        self + Iv::pt(o)
    }
}

pub fn ln2() -> Iv {
    let c = std::f64::consts::LN_2;
    Iv { lo: c.next_down(), hi: c.next_up() }
}

pub fn pi() -> Iv {
    let c = std::f64::consts::PI;
    Iv { lo: c.next_down(), hi: c.next_up() }
}

pub fn two_pi() -> Iv {
    let c = std::f64::consts::TAU;
    Iv { lo: c.next_down(), hi: c.next_up() }
}

const LN2_HI: f64 = 6.931_471_803_691_238_2e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;

/// `e^x` at a point.
pub fn exp_point(x: f64) -> Iv {
    if x == f64::NEG_INFINITY || x < -745.2 {
        return Iv { lo: 0.0, hi: f64::from_bits(1) };
    }
    if x == f64::INFINITY || x > 709.7 {
        return Iv { lo: f64::MAX, hi: f64::INFINITY };
    }
    if x == 0.0 {
        return Iv::ONE;
    }
    let k = (x / std::f64::consts::LN_2).round();
    // k·LN2_HI is exact for |k| < 2^11
    let lo_part = Iv { lo: LN2_LO.next_down(), hi: LN2_LO.next_up() };
    let r = (Iv::pt(x) - Iv::pt(k) * Iv::pt(LN2_HI)) - Iv::pt(k) * lo_part;
    // |r| <= 0.35; 20 terms leave a remainder below 1e-25
    let mut s = Iv::ONE;
    for i in (1..=20).rev() {
        s = Iv::ONE + r * s / Iv::pt(i as f64);
    }
    s = s.inflate(1e-25);
    let ki = k as i32;
    let (k1, k2) = if ki > 1000 {
        (1000, ki - 1000)
    } else if ki < -1000 {
        (-1000, ki - (-1000))
    } else {
        (ki, 0)
    };
    let mut out = s * 2f64.powi(k1);
    if k2 != 0 {
        out = out * 2f64.powi(k2);
    }
    Iv { lo: out.lo.max(0.0), hi: out.hi }
}

/// `ln x` at a point `x > 0`.
pub fn ln_point(x: f64) -> Iv {
    assert!(x > 0.0);
    if x == f64::INFINITY {
        return Iv { lo: f64::MAX, hi: f64::INFINITY };
    }
    if x == 1.0 {
        return Iv::ZERO;
    }
    let (mut f, mut e) = frexp(x);
    // f in [1, 2)
    if f > std::f64::consts::SQRT_2 {
        f *= 0.5;
        e += 1;
    }
    let fi = Iv::pt(f);
    let z = (fi - Iv::ONE) / (fi + Iv::ONE);
    let z2 = z.sqr();
    let n = 16;
    let mut s = Iv::ONE / Iv::pt((2 * n + 1) as f64);
    for j in (0..n).rev() {
        s = Iv::ONE / Iv::pt((2 * j + 1) as f64) + z2 * s;
    }
    let lnf = (Iv::pt(2.0) * z * s).inflate(z.mag() * 1e-24);
    let ei = Iv::from_int(e as i64);
    let lo_part = Iv { lo: LN2_LO.next_down(), hi: LN2_LO.next_up() };
    (ei * Iv::pt(LN2_HI) + ei * lo_part) + lnf
}

fn frexp(x: f64) -> (f64, i32) {
    let (x, bias) = if x < f64::MIN_POSITIVE { (x * 2f64.powi(64), -64) } else { (x, 0) };
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32 - 1023;
    let f = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (f, e + bias)
}

// Cody-Waite split of pi/2
const PIO2_1: f64 = 1.570_796_326_734_125_6;
const PIO2_2: f64 = 6.077_100_506_303_966e-11;
const PIO2_3: f64 = 2.022_266_248_711_166_5e-21;
const PIO2_3T: f64 = 8.478_427_660_368_9e-32;

/// `(sin 2πt, cos 2πt)` for a point `t` in `[0, 1)`.
fn sincos_turn_point(t: f64) -> (Iv, Iv) {
    let x = two_pi() * Iv::pt(t);
    let k = (x.mid() / std::f64::consts::FRAC_PI_2).round();
    let kp = Iv::pt(k);
    let tail = Iv { lo: PIO2_3T.next_down(), hi: PIO2_3T.next_up() };
    let r = x - kp * Iv::pt(PIO2_1) - kp * Iv::pt(PIO2_2) - kp * Iv::pt(PIO2_3) - kp * tail;
    let (s, c) = sincos_small(r);
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

// Taylor series for |r| <= pi/4 + tiny
fn sincos_small(r: Iv) -> (Iv, Iv) {
    let r2 = r.sqr();
    let n = 14;
    let mut s = Iv::ONE;
    for i in (1..=n).rev() {
        let d = Iv::pt(((2 * i) * (2 * i + 1)) as f64);
        s = Iv::ONE - r2 * s / d;
    }
    let s = (r * s).inflate(1e-30);
    let mut c = Iv::ONE;
    for i in (1..=n).rev() {
        let d = Iv::pt(((2 * i - 1) * (2 * i)) as f64);
        c = Iv::ONE - r2 * c / d;
    }
    let c = c.inflate(1e-30);
    (s, c)
}

/// Complex interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CIv {
    pub re: Iv,
    pub im: Iv,
}

impl CIv {
    pub const ZERO: CIv = CIv { re: Iv::ZERO, im: Iv::ZERO };
    pub const ONE: CIv = CIv { re: Iv::ONE, im: Iv::ZERO };

    pub fn new(re: Iv, im: Iv) -> CIv {
        CIv { re, im }
    }

    pub fn conj(self) -> CIv {
        CIv { re: self.re, im: -self.im }
    }

    pub fn scale(self, s: Iv) -> CIv {
        CIv { re: self.re * s, im: self.im * s }
    }

    /// Upper bound on the modulus.
    pub fn abs_hi(&self) -> f64 {
        let a = self.re.mag();
        let b = self.im.mag();
        (Iv::pt(a).sqr() + Iv::pt(b).sqr()).sqrt().hi
    }

    /// Lower bound on the modulus.
    pub fn abs_lo(&self) -> f64 {
        let a = self.re.mig();
        let b = self.im.mig();
        (Iv::pt(a).sqr() + Iv::pt(b).sqr()).sqrt().lo
    }

    pub fn inflate(self, r: f64) -> CIv {
        CIv { re: self.re.inflate(r), im: self.im.inflate(r) }
    }

    pub fn is_exact_zero(&self) -> bool {
        *self == CIv::ZERO
    }
}

impl Add for CIv {
    type Output = CIv;
    fn add(self, o: CIv) -> CIv {
        CIv { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for CIv {
    type Output = CIv;
    fn sub(self, o: CIv) -> CIv {
        CIv { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for CIv {
    type Output = CIv;
    fn mul(self, o: CIv) -> CIv {
        CIv {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Enclosure of `ln x` for a positive big integer.
pub fn ln_uint(x: &num_bigint::BigUint) -> Iv {
    use num_traits::ToPrimitive;
    assert!(x.bits() > 0, "ln of zero");
    let bits = x.bits();
    if bits <= 53 {
        return Iv::pt(x.to_f64().expect("small")).ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().expect("53 bits");
    Iv::new(top, top + 1.0).ln() + ln2() * Iv::pt(shift as f64)
}

/// Enclosure of a rational as an `Iv`, for convenience at call sites.
pub fn ivq(x: &BigRational) -> Iv {
    Iv::from_q(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_ln_contain_reference() {
        for &x in &[-700.0, -20.5, -1.0, -1e-8, 0.3, 1.0, 2.5, 10.0, 300.0] {
            let e = exp_point(x);
            let r = x.exp();
            assert!(e.lo <= r * (1.0 + 1e-15) && r * (1.0 - 1e-15) <= e.hi, "{x}");
            assert!(e.width() <= r * 1e-13 + 1e-300, "{x} {e:?}");
        }
        for &x in &[1e-300, 0.001, 0.5, 0.99999, 1.5, 2.0, 7.389, 1e10] {
            let l = ln_point(x);
            let r = x.ln();
            assert!(l.lo <= r + 1e-15 * r.abs().max(1.0) && r - 1e-15 * r.abs().max(1.0) <= l.hi);
            assert!(l.width() < 1e-13 * r.abs().max(1.0));
        }
        // e^1 against a 20-digit literal
        let e1 = exp_point(1.0);
        assert!(e1.contains(2.718281828459045));
    }

    #[test]
    fn exp_ln_roundtrip_contains_identity() {
        for i in 1..200 {
            let x = i as f64 * 0.173;
            let y = exp_point(x).ln();
            assert!(y.contains(x), "{x} {y:?}");
        }
    }

    #[test]
    fn sincos_known_values() {
        let (s, c) = Iv::pt(0.25).sincos_turns();
        assert!(s.contains(1.0) && c.contains(0.0));
        assert!(s.width() < 1e-14 && c.width() < 1e-14, "{s:?} {c:?}");
        let (s, c) = Iv::pt(0.125).sincos_turns();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.lo <= h + 1e-16 && h - 1e-16 <= s.hi);
        assert!(c.lo <= h + 1e-16 && h - 1e-16 <= c.hi);
        for i in 0..1000 {
            let t = i as f64 / 997.0;
            let (s, c) = Iv::pt(t).sincos_turns();
            let a = 2.0 * std::f64::consts::PI * t;
            assert!((s.mid() - a.sin()).abs() < 1e-14);
            assert!((c.mid() - a.cos()).abs() < 1e-14);
            assert!((s.sqr() + c.sqr()).contains(1.0));
        }
    }

    #[test]
    fn arithmetic_is_outward() {
        let a = Iv::pt(0.1) + Iv::pt(0.2);
        assert!(a.contains_q(&(crate::rat::q_from_f64(0.1) + crate::rat::q_from_f64(0.2))));
        let third = Iv::ONE / Iv::pt(3.0);
        assert!(third.contains_q(&crate::rat::q(1, 3)));
        assert_eq!(Iv::new(-2.0, 3.0).powi(2).lo, 0.0);
    }
}
