//! Normalized finite unions of closed intervals with field endpoints.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::algebraic_endpoints::EValue;
use crate::error::{Result, SalemError};
use crate::rat::{iroot, pow2, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: EValue,
    pub hi: EValue,
}

impl Interval {
    pub fn new(lo: EValue, hi: EValue) -> Interval {
        Interval { lo, hi }
    }

    pub fn rational(lo: Q, hi: Q) -> Interval {
        Interval { lo: EValue::rational(lo), hi: EValue::rational(hi) }
    }

    pub fn point(x: EValue) -> Interval {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &EValue) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_interval(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    /// Rational enclosure of `hi − lo` of width at most `2^(1-p)`.
    pub fn width_enclosure(&self, p: u64) -> (Q, Q) {
        if let Some(w) = EValue::diff(&self.hi, &self.lo) {
            if let Some(r) = w.as_rational() {
                return (r.clone(), r.clone());
            }
        }
        let (al, ah) = self.lo.refine_interval(p);
        let (bl, bh) = self.hi.refine_interval(p);
        let lo = (bl - ah).max(Q::zero());
        (lo, bh - al)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "UnionWire")]
pub struct IntervalUnion {
    pub intervals: Vec<Interval>,
}

#[derive(Deserialize)]
struct UnionWire {
    intervals: Vec<Interval>,
}

impl TryFrom<UnionWire> for IntervalUnion {
    type Error = SalemError;
    fn try_from(w: UnionWire) -> Result<Self> {
        if !is_normalized(&w.intervals) {
            return Err(SalemError::invalid("intervals must be sorted, disjoint, with lo <= hi"));
        }
        Ok(IntervalUnion { intervals: w.intervals })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HausdorffDistanceResult {
    #[serde(with = "crate::rat::serde_q")]
    pub lo: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub hi: Q,
    pub precision: u64,
}

impl HausdorffDistanceResult {
    fn exact(v: Q, precision: u64) -> Self {
        HausdorffDistanceResult { lo: v.clone(), hi: v, precision }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

impl IntervalUnion {
    pub fn empty() -> IntervalUnion {
        IntervalUnion { intervals: vec![] }
    }

    pub fn unit() -> IntervalUnion {
        IntervalUnion { intervals: vec![Interval::rational(Q::zero(), Q::one())] }
    }

    pub fn point(x: EValue) -> IntervalUnion {
        IntervalUnion { intervals: vec![Interval::point(x)] }
    }

    pub fn from_rationals(pairs: &[(Q, Q)]) -> Result<IntervalUnion> {
        normalize(pairs.iter().map(|(a, b)| Interval::rational(a.clone(), b.clone())).collect())
    }

    /// Trust the caller that the list is sorted and pairwise separated.
    pub fn from_sorted_unchecked(intervals: Vec<Interval>) -> IntervalUnion {
        debug_assert!(is_normalized(&intervals));
        IntervalUnion { intervals }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.intervals.iter()
    }

    pub fn check_invariants(&self) -> bool {
        is_normalized(&self.intervals)
    }

    /// Index of the interval containing `x`, if any.
    pub fn locate(&self, x: &EValue) -> Option<usize> {
        let i = self.intervals.partition_point(|iv| iv.lo <= *x);
        if i == 0 {
            return None;
        }
        if *x <= self.intervals[i - 1].hi {
            Some(i - 1)
        } else {
            None
        }
    }

    pub fn contains(&self, x: &EValue) -> bool {
        self.locate(x).is_some()
    }

    pub fn contains_q(&self, x: &Q) -> bool {
        self.contains(&EValue::rational(x.clone()))
    }

    pub fn is_subset_of(&self, o: &IntervalUnion) -> bool {
        let mut j = 0;
        for iv in &self.intervals {
            while j < o.intervals.len() && o.intervals[j].hi < iv.lo {
                j += 1;
            }
            if j == o.intervals.len() || !o.intervals[j].contains_interval(iv) {
                return false;
            }
        }
        true
    }

    pub fn within_unit(&self) -> bool {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(a), Some(b)) => a.lo.cmp_q(&Q::zero()) != Ordering::Less && b.hi.cmp_q(&Q::one()) != Ordering::Greater,
            _ => true,
        }
    }

    pub fn intersect(&self, o: &IntervalUnion) -> IntervalUnion {
        intersect(self, o)
    }

    pub fn union(&self, o: &IntervalUnion) -> IntervalUnion {
        union(self, o)
    }

    /// Sum of `diam^s` upper bounds over the pieces, `s = s_num / 2^s_den_log2`.
    pub fn diam_power_sum(&self, s_num: u64, s_den_log2: u32, precision: u64) -> Result<Q> {
        diam_power_sum(self, s_num, s_den_log2, precision)
    }
}

fn is_normalized(v: &[Interval]) -> bool {
    v.iter().all(|iv| iv.lo <= iv.hi) && v.windows(2).all(|w| w[0].hi < w[1].lo)
}

/// Sort and merge overlapping or touching intervals.
pub fn normalize(mut raw: Vec<Interval>) -> Result<IntervalUnion> {
    for iv in &raw {
        if iv.lo > iv.hi {
            return Err(SalemError::invalid(format!("interval with lo > hi: [{}, {}]", iv.lo, iv.hi)));
        }
    }
    raw.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(IntervalUnion { intervals: merge_sorted(raw) })
}

fn merge_sorted(raw: Vec<Interval>) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::with_capacity(raw.len());
    for iv in raw {
        if let Some(last) = out.last_mut() {
            if iv.lo <= last.hi {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
                continue;
            }
        }
        out.push(iv);
    }
    out
}

pub fn intersect(a: &IntervalUnion, b: &IntervalUnion) -> IntervalUnion {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.intervals.len() && j < b.intervals.len() {
        let x = &a.intervals[i];
        let y = &b.intervals[j];
        let lo = if x.lo >= y.lo { &x.lo } else { &y.lo };
        let (hi, adv_a) = match x.hi.cmp(&y.hi) {
            Ordering::Less => (&x.hi, true),
            _ => (&y.hi, false),
        };
        if lo <= hi {
            out.push(Interval::new(lo.clone(), hi.clone()));
        }
        if adv_a {
            i += 1;
        } else {
            j += 1;
        }
    }
    IntervalUnion { intervals: out }
}

pub fn union(a: &IntervalUnion, b: &IntervalUnion) -> IntervalUnion {
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a.intervals[i].lo <= b.intervals[j].lo);
        if take_a {
            merged.push(a.intervals[i].clone());
            i += 1;
        } else {
            merged.push(b.intervals[j].clone());
            j += 1;
        }
    }
    IntervalUnion { intervals: merge_sorted(merged) }
}

pub fn union_all<'a>(parts: impl IntoIterator<Item = &'a IntervalUnion>) -> IntervalUnion {
    let raw: Vec<Interval> = parts.into_iter().flat_map(|u| u.intervals.iter().cloned()).collect();
    normalize(raw).expect("parts are valid unions")
}

/// Image under the increasing affine map sending `[0,1]` onto `[lo, hi]`.
pub fn similarity(a: &IntervalUnion, lo: &Q, hi: &Q) -> Result<IntervalUnion> {
    if lo > hi {
        return Err(SalemError::invalid("similarity target needs lo <= hi"));
    }
    if !a.within_unit() {
        return Err(SalemError::invalid("similarity source must lie in [0,1]"));
    }
    let c = hi - lo;
    if c.is_zero() {
        return Ok(if a.is_empty() { IntervalUnion::empty() } else { IntervalUnion::point(EValue::rational(lo.clone())) });
    }
    let intervals = a
        .intervals
        .iter()
        .map(|iv| Ok(Interval::new(iv.lo.affine_image(&c, lo)?, iv.hi.affine_image(&c, lo)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(IntervalUnion { intervals })
}

// Enclosure [lo, hi] of a nonnegative quantity as a max/min combination.
type Enc = (Q, Q);

fn diff_enc(b: &EValue, a: &EValue, p: u64) -> Enc {
    if let Some(d) = EValue::diff(b, a) {
        if let Some(r) = d.as_rational() {
            return (r.clone(), r.clone());
        }
        let (l, h) = d.refine_interval(p);
        return (l, h);
    }
    let (al, ah) = a.refine_interval(p);
    let (bl, bh) = b.refine_interval(p);
    (bl - ah, bh - al)
}

fn min_enc(x: Enc, y: Enc) -> Enc {
    (x.0.min(y.0), x.1.min(y.1))
}

fn max_enc(x: Enc, y: Enc) -> Enc {
    (x.0.max(y.0), x.1.max(y.1))
}

/// Enclosure of `max_{x∈K} d(x, L)` for nonempty `L`.
fn directed_sup(k: &IntervalUnion, l: &IntervalUnion, p: u64) -> Enc {
    let first = &l.intervals[0].lo;
    let last = &l.intervals[l.len() - 1].hi;
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let mut best: Enc = (Q::zero(), Q::zero());
    for iv in &k.intervals {
        if iv.lo < *first {
            best = max_enc(best, diff_enc(first, &iv.lo, p));
        }
        if iv.hi > *last {
            best = max_enc(best, diff_enc(&iv.hi, last, p));
        }
        for w in l.intervals.windows(2) {
            let b = &w[0].hi;
            let a = &w[1].lo;
            if iv.hi < *b {
                break;
            }
            if iv.lo > *a {
                continue;
            }
            let u = if iv.lo >= *b { &iv.lo } else { b };
            let v = if iv.hi <= *a { &iv.hi } else { a };
            let gap = diff_enc(a, b, p);
            let half_gap = (&gap.0 * &half, &gap.1 * &half);
            let c = min_enc(min_enc(diff_enc(v, b, p), diff_enc(a, u, p)), half_gap);
            best = max_enc(best, c);
        }
    }
    (best.0.max(Q::zero()), best.1.max(Q::zero()))
}

fn bounded(e: &Enc) -> Enc {
    let one = Q::one();
    (&e.0 / (&one + &e.0), &e.1 / (&one + &e.1))
}

/// Bounded Hausdorff metric `max(δ(K,L), δ(L,K))` with `δ = sup d/(1+d)`.
pub fn hausdorff_distance(k: &IntervalUnion, l: &IntervalUnion, precision: u64) -> HausdorffDistanceResult {
    match (k.is_empty(), l.is_empty()) {
        (true, true) => return HausdorffDistanceResult::exact(Q::zero(), precision),
        (true, false) | (false, true) => return HausdorffDistanceResult::exact(Q::one(), precision),
        _ => {}
    }
    let p = precision + 3;
    let dk = if k.is_subset_of(l) { (Q::zero(), Q::zero()) } else { bounded(&directed_sup(k, l, p)) };
    let dl = if l.is_subset_of(k) { (Q::zero(), Q::zero()) } else { bounded(&directed_sup(l, k, p)) };
    let (lo, hi) = max_enc(dk, dl);
    HausdorffDistanceResult { lo, hi, precision }
}

/// Upper bound on `x^(num / 2^d)` for rational `x >= 0`, with error below `2^-p`.
pub fn dyadic_power_upper(x: &Q, num: u64, d: u32, p: u64) -> Q {
    if x.is_zero() {
        return Q::zero();
    }
    let y: Q = Pow::pow(x, num as u32);
    let root = 1u32 << d;
    let n: BigUint = y.numer().magnitude().clone();
    let den: BigUint = y.denom().magnitude().clone();
    let shifted = n << (p as usize * root as usize);
    // ceil(shifted / den)
    let (qv, rem) = num_integer::Integer::div_rem(&shifted, &den);
    let yv = if rem.is_zero() { qv } else { qv + 1u32 };
    let z = iroot(&yv, root);
    let z = if Pow::pow(&z, root) == yv { z } else { z + 1u32 };
    BigRational::new(BigInt::from(z), BigInt::one() << p as usize)
}

/// Certified upper bound on `Σ diam(I)^s`, `s = s_num/2^d ∈ (0,1]`, within `2^-precision`.
pub fn diam_power_sum(a: &IntervalUnion, s_num: u64, d: u32, precision: u64) -> Result<Q> {
    if s_num == 0 || s_num > (1u64 << d) {
        return Err(SalemError::invalid("exponent must lie in (0,1]"));
    }
    if d > 16 {
        return Err(SalemError::invalid("exponent denominator 2^d limited to d <= 16"));
    }
    let count = a.len().max(1) as u64;
    let guard = 64 - count.leading_zeros() as u64 + 2;
    let p = precision + guard;
    // Hölder: an error e in the width moves w^s by at most e^s
    let pw = ((p as u128 * (1u128 << d)) / s_num as u128 + 1) as u64;
    let mut widths: HashMap<Q, u64> = HashMap::new();
    for iv in &a.intervals {
        let (_, whi) = iv.width_enclosure(pw);
        *widths.entry(whi).or_insert(0) += 1;
    }
    Ok(sum_powers(&widths, s_num, d, p))
}

pub(crate) fn sum_powers(widths: &HashMap<Q, u64>, s_num: u64, d: u32, p: u64) -> Q {
    let mut total = Q::zero();
    for (w, c) in widths {
        total += dyadic_power_upper(w, s_num, d, p) * Q::from_integer(BigInt::from(*c));
    }
    total
}

/// Smallest dyadic `2^-j` (as `j`) not exceeding `x > 0`.
pub fn dyadic_floor_exp(x: &Q) -> i64 {
    let mut j = -crate::rat::floor_log2(x);
    while pow2(-j) > *x {
        j += 1;
    }
    j
}
