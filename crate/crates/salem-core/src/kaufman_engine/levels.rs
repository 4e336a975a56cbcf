//! Finite levels `P(α,k)`, `D_n(α)`, `S^(k)(α)` and density products.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::coeffs::{convolve, CoefficientTable};
use super::primes::prime_window;
use super::schedule::{alpha_parts, schedule_density, stage_m0, theta_schedule, KaufmanSchedule, Mode, ModeKind};
use crate::algebraic_endpoints::EValue;
use crate::error::{Result, SalemError};
use crate::interval_sets::{normalize, union_all, Interval, IntervalUnion};
use crate::rat::{serde_q, Q};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelData {
    #[serde(with = "serde_q")]
    pub alpha: Q,
    pub k: u64,
    #[serde(rename = "P")]
    pub p: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level: Option<IntervalUnion>,
    pub schedules: Vec<KaufmanSchedule>,
    pub mode: ModeKind,
}

/// The stage recursion: schedule `m+1` is `Θ(α, Π_{i≤m} G_i, 2^(−m−2), ⌈10x₀⌉+m)`.
/// Returns the schedules and the table of `Π_{i≤k} G_i`.
fn run_stages(alpha: &Q, k: u64, mode: &Mode, band: usize) -> Result<(Vec<KaufmanSchedule>, CoefficientTable)> {
    alpha_parts(alpha)?;
    let mut psi = CoefficientTable::delta(band);
    let mut out = Vec::new();
    for m in 0..k {
        let eps = Q::new(1.into(), BigInt::from(1u8) << (m + 2));
        let m0 = stage_m0(alpha, mode.m0_scale, m);
        let sched = theta_schedule(alpha, &psi, &eps, &m0, mode)?;
        let g = schedule_density(&sched, band, mode.caps.max_sieve)?;
        psi = convolve(&psi, &g, band)?;
        out.push(sched);
    }
    Ok((out, psi))
}

fn primes_of(schedules: &[KaufmanSchedule], max_sieve: u64) -> Result<Vec<u64>> {
    let mut set = BTreeSet::new();
    for s in schedules {
        for m in &s.ms {
            let m = m
                .to_u64()
                .filter(|&v| v <= max_sieve)
                .ok_or_else(|| SalemError::infeasible(format!("prime window at M = {m} beyond sieve cap")))?;
            set.extend(prime_window(m)?);
        }
    }
    Ok(set.into_iter().collect())
}

/// `P(α,k)`: `{1}` at `k = 0`, else the union of the prime windows of all
/// stage schedules.
pub fn p_alpha_k(alpha: &Q, k: u64, mode: &Mode) -> Result<LevelData> {
    if k == 0 {
        alpha_parts(alpha)?;
        return Ok(LevelData { alpha: alpha.clone(), k, p: vec![1], level: None, schedules: vec![], mode: mode.kind });
    }
    let (schedules, _) = run_stages(alpha, k, mode, mode.caps.band)?;
    let p = primes_of(&schedules, mode.caps.max_sieve)?;
    Ok(LevelData { alpha: alpha.clone(), k, p, level: None, schedules, mode: mode.kind })
}

/// `D_n(α) = ⋃_{m ≤ n} [m/n ± n^(−2−α)] ∩ [0,1]`.
pub fn d_n(alpha: &Q, n: u64) -> Result<IntervalUnion> {
    let (a, b) = alpha_parts(alpha)?;
    if n == 0 {
        return Err(SalemError::invalid("D_n needs n >= 1"));
    }
    let r = num_traits::Pow::pow(Q::new(1.into(), BigInt::from(n)), 2 * b + a);
    let mut raw = Vec::with_capacity(n as usize + 1);
    for m in 0..=n {
        let c = Q::new(BigInt::from(m), BigInt::from(n));
        let lo = if m == 0 { EValue::zero() } else { EValue::signed(c.clone(), true, r.clone(), 1, b)? };
        let hi = if m == n { EValue::one() } else { EValue::signed(c, false, r.clone(), 1, b)? };
        raw.push(Interval::new(lo, hi));
    }
    normalize(raw)
}

/// `S^(k)(α) = ⋃_{n ∈ P(α,k)} D_n(α)`.
pub fn s_level(alpha: &Q, k: u64, mode: &Mode) -> Result<LevelData> {
    let mut data = p_alpha_k(alpha, k, mode)?;
    let total: u64 = data.p.iter().map(|n| n + 1).sum();
    if total > mode.caps.max_intervals as u64 {
        return Err(SalemError::infeasible(format!("{total} balls exceed max_intervals")));
    }
    let parts = data.p.iter().map(|&n| d_n(alpha, n)).collect::<Result<Vec<_>>>()?;
    data.level = Some(union_all(parts.iter()));
    Ok(data)
}

/// `S^(0)(α), …, S^(k)(α)` from a single stage run.
pub fn s_levels(alpha: &Q, k: u64, mode: &Mode) -> Result<Vec<IntervalUnion>> {
    let (schedules, _) = run_stages(alpha, k, mode, mode.caps.band)?;
    let mut out = vec![IntervalUnion::unit()];
    for j in 1..=k as usize {
        let p = primes_of(&schedules[..j], mode.caps.max_sieve)?;
        let total: u64 = p.iter().map(|n| n + 1).sum();
        if total > mode.caps.max_intervals as u64 {
            return Err(SalemError::infeasible(format!("{total} balls exceed max_intervals at level {j}")));
        }
        let parts = p.iter().map(|&n| d_n(alpha, n)).collect::<Result<Vec<_>>>()?;
        out.push(union_all(parts.iter()));
    }
    Ok(out)
}

/// Coefficients of `Π_{m≤k} G_m` on `[−band, band]`.
pub fn density_coefficients(alpha: &Q, k: u64, band: usize, mode: &Mode) -> Result<CoefficientTable> {
    if band == 0 {
        return Err(SalemError::invalid("band must be >= 1"));
    }
    Ok(run_stages(alpha, k, mode, band)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kaufman_engine::schedule::Caps;
    use crate::rat::q;
    use num_traits::Zero;

    fn member_oracle(alpha: &Q, n: u64, x: &Q) -> bool {
        let (a, b) = alpha_parts(alpha).unwrap();
        let nx = x * Q::from_integer(BigInt::from(n));
        let frac = &nx - nx.floor();
        let d = if frac > q(1, 2) { Q::from_integer(1.into()) - frac } else { frac };
        // d ≤ n^(−1−α)  ⇔  d^b·n^(a+b) ≤ 1
        let lhs = num_traits::Pow::pow(&d, b) * num_traits::Pow::pow(Q::from_integer(BigInt::from(n)), a + b);
        lhs <= Q::from_integer(1.into())
    }

    #[test]
    fn d_n_examples() {
        assert_eq!(d_n(&q(1, 1), 1).unwrap(), IntervalUnion::unit());
        assert_eq!(d_n(&q(0, 1), 2).unwrap(), IntervalUnion::unit());
        let d = d_n(&q(2, 1), 3).unwrap();
        assert_eq!(d.len(), 4);
        for i in 0..=1000 {
            let x = q(i, 1000);
            assert_eq!(d.contains_q(&x), member_oracle(&q(2, 1), 3, &x), "x={x}");
        }
        let h = d_n(&q(1, 2), 7).unwrap();
        for i in 0..=997 {
            let x = q(i, 997);
            assert_eq!(h.contains_q(&x), member_oracle(&q(1, 2), 7, &x));
        }
    }

    #[test]
    fn level_zero() {
        let mode = Mode::demo(None, Caps::default());
        let l = s_level(&q(1, 1), 0, &mode).unwrap();
        assert_eq!(l.p, vec![1]);
        assert_eq!(l.level.unwrap(), IntervalUnion::unit());
        let t = density_coefficients(&q(1, 1), 0, 4, &mode).unwrap();
        assert_eq!(t.get(0).unwrap(), crate::enclosure::CIv::ONE);
        assert!(t.get(3).unwrap().is_exact_zero());
        assert!(t.tail_bound.is_zero());
    }

    #[test]
    fn demo_levels_are_cumulative_and_windowed() {
        let mode = Mode::demo(None, Caps::default());
        let alpha = q(1, 1);
        let p1 = p_alpha_k(&alpha, 1, &mode).unwrap();
        let p2 = p_alpha_k(&alpha, 2, &mode).unwrap();
        assert!(p1.p.iter().all(|x| p2.p.contains(x)));
        for p in &p2.p {
            let inside = p2.schedules.iter().flat_map(|s| s.ms.iter()).any(|m| {
                let m = m.to_u64().unwrap();
                2 * p > m && *p <= m
            });
            assert!(inside, "{p}");
        }
        let s1 = s_level(&alpha, 1, &mode).unwrap();
        let level = s1.level.unwrap();
        for i in 0..500 {
            let x = q(2 * i + 1, 1000);
            let direct = s1.p.iter().any(|&n| member_oracle(&alpha, n, &x));
            assert_eq!(level.contains_q(&x), direct);
        }
    }

    #[test]
    fn density_demo_is_hermitian() {
        let mode = Mode::demo(None, Caps::default());
        let t = density_coefficients(&q(1, 1), 2, 512, &mode).unwrap();
        assert!(t.is_hermitian());
        assert!(t.tail_bound.is_finite());
        assert!(t.get(0).unwrap().re.contains(1.0));
    }
}
