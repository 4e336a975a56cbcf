//! Levels of `g(q, x)`: shrink stages on `x(k+1) = 1`, scaled `T(α)` steps
//! on `x(k+1) = 0`, with `α = 2(1−q)/q`.
//!
//! A level is a bag of pieces `anchor + [lo, hi]` where the anchor is
//! rational and `lo` has zero rational part. Shrink and `T` steps only look
//! at the shape, so the bag can be aggregated by shape (a profile) when the
//! level itself is too large to list.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::t_level::t_levels;
use crate::algebraic_endpoints::EValue;
use crate::error::{Result, SalemError};
use crate::interval_sets::{dyadic_floor_exp, dyadic_power_upper, normalize, Interval, IntervalUnion};
use crate::kaufman_engine::schedule::Mode;
use crate::rat::{pow2, serde_big, serde_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Shape {
    lo: EValue,
    hi: EValue,
}

impl Shape {
    fn degenerate(&self) -> bool {
        self.lo == self.hi
    }

    fn rational_width(&self) -> Option<Q> {
        let d = EValue::diff(&self.hi, &self.lo)?;
        d.as_rational().cloned()
    }
}

#[derive(Clone, Debug)]
struct Piece {
    anchor: Q,
    shape: Shape,
    count: BigUint,
}

fn split(lo: &EValue, hi: &EValue) -> (Q, Shape) {
    let off = lo.s().clone();
    let neg = -off.clone();
    (off, Shape { lo: lo.add_q(&neg), hi: hi.add_q(&neg) })
}

fn rational_shape(w: Q) -> Shape {
    Shape { lo: EValue::zero(), hi: EValue::rational(w) }
}

#[derive(Clone, Debug)]
struct Bag {
    aggregate: bool,
    pieces: Vec<Piece>,
}

impl Bag {
    fn unit(aggregate: bool) -> Bag {
        let piece = Piece { anchor: Q::zero(), shape: rational_shape(Q::one()), count: BigUint::one() };
        Bag { aggregate, pieces: vec![piece] }
    }

    fn from_union(u: &IntervalUnion, aggregate: bool) -> Bag {
        let pieces = u
            .iter()
            .map(|iv| {
                let (anchor, shape) = split(&iv.lo, &iv.hi);
                Piece { anchor, shape, count: BigUint::one() }
            })
            .collect();
        let mut bag = Bag { aggregate, pieces };
        bag.merge();
        bag
    }

    fn merge(&mut self) {
        if !self.aggregate {
            return;
        }
        let mut map: HashMap<Shape, BigUint> = HashMap::new();
        for p in self.pieces.drain(..) {
            *map.entry(p.shape).or_default() += p.count;
        }
        let mut pieces: Vec<Piece> =
            map.into_iter().map(|(shape, count)| Piece { anchor: Q::zero(), shape, count }).collect();
        pieces.sort_by(|a, b| a.shape.cmp(&b.shape));
        self.pieces = pieces;
    }

    fn total(&self) -> BigUint {
        self.pieces.iter().map(|p| &p.count).sum()
    }

    fn to_union(&self) -> Result<IntervalUnion> {
        let raw = self
            .pieces
            .iter()
            .map(|p| Interval::new(p.shape.lo.add_q(&p.anchor), p.shape.hi.add_q(&p.anchor)))
            .collect();
        normalize(raw)
    }

    fn widths(&self) -> Result<Vec<WidthCount>> {
        let mut map: HashMap<Q, BigUint> = HashMap::new();
        for p in &self.pieces {
            let w = p.shape.rational_width().ok_or_else(|| SalemError::invalid("shrunk piece with irrational width"))?;
            *map.entry(w).or_default() += &p.count;
        }
        let mut out: Vec<WidthCount> = map.into_iter().map(|(width, count)| WidthCount { width, count }).collect();
        out.sort_by(|a, b| a.width.cmp(&b.width));
        Ok(out)
    }
}

/// `H = ball(mid, min(hw, ρ))` when that stays rational, else a dyadic ball
/// inside `J` of radius at most `min(hw, ρ)/2`. Returns the anchor shift.
fn shrink_shape(sh: &Shape, rho: &Q) -> (Q, Shape) {
    if sh.degenerate() {
        return (Q::zero(), sh.clone());
    }
    let two_rho = rho * Q::from_integer(BigInt::from(2));
    if let Some(w) = sh.rational_width().filter(|_| sh.lo.is_rational()) {
        if w <= two_rho {
            return (Q::zero(), sh.clone());
        }
        let half = w / Q::from_integer(BigInt::from(2));
        return (half - rho, rational_shape(two_rho));
    }
    if let Some(m) = EValue::midpoint(&sh.lo, &sh.hi) {
        if let Some(m) = m.as_rational() {
            if sh.lo.add_q(&two_rho) < sh.hi {
                return (m - rho, rational_shape(two_rho));
            }
        }
    }
    let iv = Interval::new(sh.lo.clone(), sh.hi.clone());
    let mut p = 64u64;
    loop {
        let (wl, _) = iv.width_enclosure(p);
        if wl > Q::zero() {
            let r = rho.clone().min(wl / Q::from_integer(BigInt::from(2)));
            let i = dyadic_floor_exp(&(r / Q::from_integer(BigInt::from(2))));
            let rr = pow2(-i);
            let (ll, _) = sh.lo.refine_interval(p);
            let (_, hh) = sh.hi.refine_interval(p);
            let mid = (ll + hh) / Q::from_integer(BigInt::from(2));
            let grid = pow2(-(i + 1));
            let c = (&mid / &grid).round() * &grid;
            let left = &c - &rr;
            let right = &c + &rr;
            if sh.lo.cmp_q(&left).is_le() && sh.hi.cmp_q(&right).is_ge() {
                return (left, rational_shape(&rr * Q::from_integer(BigInt::from(2))));
            }
        }
        p *= 2;
    }
}

/// `ρ = 2^(−j)` for the largest dyadic with `(2ρ)^(2^(−k))·n ≤ 2^(−k)`, `n = M_k + 1`.
pub fn shrink_rho_exp(k: u64, n: &BigUint) -> Result<u64> {
    if k > 24 {
        return Err(SalemError::infeasible("shrink stage beyond k = 24"));
    }
    let root = 1u64 << k;
    let x = num_traits::Pow::pow(n, root as u32);
    let e = if x <= BigUint::one() { 0 } else { (x - 1u32).bits() };
    Ok(1 + k * root + e)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthCount {
    #[serde(with = "serde_q")]
    pub width: Q,
    #[serde(with = "serde_big")]
    pub count: BigUint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GStage {
    /// Transition from level `k` to level `k+1`.
    pub k: u64,
    pub bit: u8,
    /// `M_k + 1`, the number of level-`k` intervals.
    #[serde(with = "serde_big")]
    pub intervals_before: BigUint,
    #[serde(with = "serde_big")]
    pub intervals_after: BigUint,
    /// Shrink stages: `ρ = 2^(−rho_exp)` and the widths of the `H_i`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho_exp: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub widths: Vec<WidthCount>,
    /// `T` stages: the base level `s` and the depth `k+1−s`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GTrace {
    #[serde(with = "serde_q")]
    pub q: Q,
    #[serde(with = "serde_q")]
    pub alpha: Q,
    pub x: Vec<u8>,
    pub k: u64,
    pub stages: Vec<GStage>,
}

/// `α = 2(1−q)/q`.
pub fn alpha_of_q(q: &Q) -> Result<Q> {
    if *q <= Q::zero() || *q >= Q::one() {
        return Err(SalemError::invalid("q must lie in (0,1)"));
    }
    Ok(Q::from_integer(BigInt::from(2)) * (Q::one() - q) / q)
}

fn check_bits(x: &[u8], k: u64) -> Result<()> {
    if (x.len() as u64) < k {
        return Err(SalemError::invalid(format!("need {k} bits of x, got {}", x.len())));
    }
    if x.iter().any(|&b| b > 1) {
        return Err(SalemError::invalid("x must be a list of 0/1 bits"));
    }
    Ok(())
}

// The bit list holds x(1), x(2), …; stage k reads x(k+1) = x[k].
fn t_depth_needed(x: &[u8], k: u64) -> u64 {
    let mut s = 0;
    let mut need = 0;
    for j in 0..k {
        if x[j as usize] == 1 {
            s = j + 1;
        } else {
            need = need.max(j + 1 - s);
        }
    }
    need
}

fn run(q: &Q, x: &[u8], k: u64, mode: &Mode, aggregate: bool) -> Result<(GTrace, Bag)> {
    let alpha = alpha_of_q(q)?;
    check_bits(x, k)?;
    let depth = t_depth_needed(x, k);
    let templates: Vec<Bag> = if depth == 0 {
        vec![]
    } else {
        t_levels(&alpha, depth, mode)?.iter().map(|t| Bag::from_union(&t.level, aggregate)).collect()
    };
    let cap = BigUint::from(mode.caps.max_intervals);
    let mut current = Bag::unit(aggregate);
    let mut base = current.clone();
    let mut s = 0u64;
    let mut stages = Vec::new();
    for j in 0..k {
        let bit = x[j as usize];
        let before = current.total();
        let mut stage = GStage {
            k: j,
            bit,
            intervals_before: before.clone(),
            intervals_after: BigUint::zero(),
            rho_exp: None,
            widths: vec![],
            base: None,
            depth: None,
        };
        if bit == 1 {
            let e = shrink_rho_exp(j, &before)?;
            let rho = pow2(-(e as i64));
            let pieces = current
                .pieces
                .iter()
                .map(|p| {
                    let (shift, shape) = shrink_shape(&p.shape, &rho);
                    Piece { anchor: &p.anchor + shift, shape, count: p.count.clone() }
                })
                .collect();
            current = Bag { aggregate, pieces };
            current.merge();
            stage.rho_exp = Some(e);
            stage.widths = current.widths()?;
            base = current.clone();
            s = j + 1;
        } else {
            let d = j + 1 - s;
            let t = &templates[d as usize];
            let mut pieces = Vec::new();
            for b in &base.pieces {
                if b.shape.degenerate() {
                    pieces.push(b.clone());
                    continue;
                }
                let w = b.shape.rational_width().filter(|_| b.shape.lo.is_rational()).ok_or_else(|| {
                    SalemError::invalid("T step needs rational base intervals")
                })?;
                let start = &b.anchor + b.shape.lo.s();
                for tp in &t.pieces {
                    let lo = tp.shape.lo.affine_image(&w, &Q::zero())?;
                    let hi = tp.shape.hi.affine_image(&w, &Q::zero())?;
                    pieces.push(Piece { anchor: &start + &w * &tp.anchor, shape: Shape { lo, hi }, count: &b.count * &tp.count });
                }
                if !aggregate && BigUint::from(pieces.len()) > cap {
                    return Err(SalemError::infeasible("g level exceeds max_intervals"));
                }
            }
            current = Bag { aggregate, pieces };
            current.merge();
            stage.base = Some(s);
            stage.depth = Some(d);
        }
        stage.intervals_after = current.total();
        if !aggregate && stage.intervals_after > cap {
            return Err(SalemError::infeasible("g level exceeds max_intervals"));
        }
        stages.push(stage);
    }
    let trace = GTrace { q: q.clone(), alpha, x: x[..k as usize].to_vec(), k, stages };
    Ok((trace, current))
}

/// Level `k` of `g(q, x)`.
pub fn g_construction_level(q: &Q, x: &[u8], k: u64, mode: &Mode) -> Result<IntervalUnion> {
    run(q, x, k, mode, false)?.1.to_union()
}

/// Stage trace of `g(q, x)` up to level `k`, computed on aggregated shapes so
/// that interval counts may grow past what can be listed.
pub fn g_profile_trace(q: &Q, x: &[u8], k: u64, mode: &Mode) -> Result<GTrace> {
    Ok(run(q, x, k, mode, true)?.0)
}

/// Certified upper bound on `Σ count·width^(2^(−k))` at precision `p`.
pub fn cover_sum_upper(widths: &[WidthCount], k: u64, p: u64) -> Result<Q> {
    if k > 16 {
        return Err(SalemError::invalid("cover sums limited to k <= 16"));
    }
    let mut total = Q::zero();
    for w in widths {
        let c = Q::from_integer(BigInt::from(w.count.clone()));
        total += dyadic_power_upper(&w.width, 1, k as u32, p) * c;
    }
    Ok(total)
}

impl GStage {
    /// Certified `Σ diam(H_i)^(2^(−k))` and whether it is at most `2^(−k)`.
    /// Precision grows until the bound is decided or 4096 bits are spent.
    pub fn cover_sum(&self) -> Result<Option<(Q, bool)>> {
        if self.rho_exp.is_none() {
            return Ok(None);
        }
        let target = pow2(-(self.k as i64));
        let mut p = 64;
        loop {
            let bound = cover_sum_upper(&self.widths, self.k, p)?;
            if bound <= target || p >= 4096 {
                let ok = bound <= target;
                return Ok(Some((bound, ok)));
            }
            p *= 4;
        }
    }
}

impl GTrace {
    pub fn final_count(&self) -> u64 {
        self.stages.last().and_then(|s| s.intervals_after.to_u64()).unwrap_or(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kaufman_engine::schedule::Caps;
    use crate::rat::q;

    fn demo() -> Mode {
        Mode::demo(None, Caps::default())
    }

    #[test]
    fn level_zero_and_first_shrink() {
        assert_eq!(g_construction_level(&q(1, 2), &[], 0, &demo()).unwrap(), IntervalUnion::unit());
        assert_eq!(shrink_rho_exp(0, &BigUint::one()).unwrap(), 1);
        let l = g_construction_level(&q(1, 2), &[1], 1, &demo()).unwrap();
        assert_eq!(l, IntervalUnion::unit());
        let l = g_construction_level(&q(1, 2), &[1, 1], 2, &demo()).unwrap();
        // n = 1 at k = 1: (2ρ)^(1/2) ≤ 1/2 gives ρ = 1/8
        assert_eq!(l, IntervalUnion::from_rationals(&[(q(3, 8), q(5, 8))]).unwrap());
        assert!(g_construction_level(&q(0, 1), &[], 0, &demo()).is_err());
        assert!(g_construction_level(&q(1, 1), &[], 0, &demo()).is_err());
    }

    #[test]
    fn rho_is_largest() {
        for k in 0..4u64 {
            for n in 1..40u32 {
                let n = BigUint::from(n);
                let j = shrink_rho_exp(k, &n).unwrap();
                // (2ρ)^(2^−k)·n ≤ 2^−k  ⇔  n^(2^k) ≤ 2^(j−1−k·2^k)
                let lhs = num_traits::Pow::pow(&n, 1u32 << k);
                let ok = |j: u64| lhs <= BigUint::one() << (j - 1 - k * (1 << k)) as usize;
                assert!(ok(j));
                assert!(j == 1 + k * (1 << k) || !ok(j - 1));
            }
        }
    }

    #[test]
    fn shrink_keeps_inside() {
        let a = EValue::new(q(0, 1), q(1, 7), 1, 2).unwrap();
        let b = EValue::new(q(1, 3), q(1, 5), 1, 3).unwrap();
        let (off, s) = split(&a, &b);
        for j in [1i64, 4, 20] {
            let (shift, h) = shrink_shape(&s, &pow2(-j));
            let lo = h.lo.add_q(&(&off + &shift));
            let hi = h.hi.add_q(&(&off + &shift));
            assert!(a <= lo && hi <= b && lo < hi);
            assert!(h.rational_width().unwrap() <= pow2(1 - j));
        }
    }

    #[test]
    fn profile_matches_materialized() {
        let x = [1u8, 0, 1];
        let m = run(&q(1, 2), &x, 3, &demo(), false).unwrap();
        let p = run(&q(1, 2), &x, 3, &demo(), true).unwrap();
        assert_eq!(m.0, p.0);
        let level = m.1.to_union().unwrap();
        assert_eq!(BigUint::from(level.len()), p.1.total());
        for st in &p.0.stages {
            if let Some((_, ok)) = st.cover_sum().unwrap() {
                assert!(ok, "stage {}", st.k);
            }
        }
    }
}
