//! Diagnostic dimension estimates on finite levels, and numerical re-checks
//! of the Fourier bounds and the cover sums.
//!
//! Estimates here describe finite levels only; they do not certify the
//! dimension of any limit set.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebraic_endpoints::EValue;
use crate::enclosure::{CIv, Iv};
use crate::error::{Result, SalemError};
use crate::interval_sets::IntervalUnion;
use crate::kaufman_engine::bump::Xi;
use crate::kaufman_engine::coeffs::{cn_bound, fm_coefficient, fm_table, CoefficientTable};
use crate::kaufman_engine::schedule::{check_conclusion, verify_schedule, KaufmanSchedule};
use crate::rat::{fmt_q, pow2, q_from_f64, serde_q, Q};
use crate::salem_constructions::blocks::cantor_level;
use crate::salem_constructions::g::GTrace;

pub const DIAGNOSTIC_BANNER: &str = "diagnostic estimate on finite levels; not a certified dimension";

fn floor_ev(x: &EValue) -> BigInt {
    if let Some(r) = x.as_rational() {
        return r.floor().to_integer();
    }
    let mut p = 64;
    loop {
        let (l, h) = x.refine_interval(p);
        let (fl, fh) = (l.floor().to_integer(), h.floor().to_integer());
        if fl == fh {
            return fl;
        }
        p *= 2;
    }
}

/// Number of closed dyadic boxes `[i·2^(−j), (i+1)·2^(−j)]` meeting the union.
pub fn box_count(level: &IntervalUnion, j: u32) -> Result<u64> {
    if j > 62 {
        return Err(SalemError::invalid("box scale limited to j <= 62"));
    }
    let scale = pow2(j as i64);
    let last = BigInt::from((1u64 << j) - 1);
    let mut count = 0u64;
    let mut next = BigInt::zero();
    for iv in level.iter() {
        let lo = iv.lo.affine_image(&scale, &Q::zero())?;
        let hi = iv.hi.affine_image(&scale, &Q::zero())?;
        let fl = floor_ev(&lo);
        let on_grid = lo.cmp_q(&Q::from_integer(fl.clone())).is_eq();
        let first = if on_grid { fl - 1 } else { fl }.max(next.clone()).max(BigInt::zero());
        let end = floor_ev(&hi).min(last.clone());
        if end >= first {
            let n: BigInt = &end - &first + 1;
            count += n.to_u64().unwrap_or(0);
            next = end + 1;
        }
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxFit {
    pub scales: Vec<u32>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub banner: String,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Least-squares slope of `log₂ count` against `j`.
pub fn box_dim_fit(samples: &[(u32, u64)]) -> Result<BoxFit> {
    if samples.len() < 3 {
        return Err(SalemError::invalid("box fit needs at least 3 scales"));
    }
    if samples.iter().any(|s| s.1 == 0) {
        return Err(SalemError::invalid("box counts must be positive"));
    }
    let x: Vec<f64> = samples.iter().map(|s| s.0 as f64).collect();
    let y: Vec<f64> = samples.iter().map(|s| (s.1 as f64).log2()).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(BoxFit {
        scales: samples.iter().map(|s| s.0).collect(),
        counts: samples.iter().map(|s| s.1).collect(),
        slope,
        intercept,
        residual,
        banner: DIAGNOSTIC_BANNER.into(),
    })
}

/// Box counts of `levels[i]` at scale `scales[i]`, then the fit.
pub fn box_dim_fit_levels(levels: &[(u32, IntervalUnion)]) -> Result<BoxFit> {
    let samples = levels.iter().map(|(j, l)| Ok((*j, box_count(l, *j)?))).collect::<Result<Vec<_>>>()?;
    box_dim_fit(&samples)
}

/// Cantor level `j` at the largest dyadic box size `2^(−s) ≤ 3^(−j)`, for `j = 1..=depth`.
pub fn cantor_box_levels(depth: u32) -> Result<Vec<(u32, IntervalUnion)>> {
    (1..=depth)
        .map(|j| {
            let target = BigUint::from(3u32).pow(j);
            let s = (&target - 1u32).bits() as u32;
            Ok((s, cantor_level(j as u64)?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSup {
    pub lo: u64,
    pub hi: u64,
    pub sup: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFitReport {
    pub band_lo: u64,
    pub band_hi: u64,
    pub fitted_s: f64,
    pub blocks: Vec<BlockSup>,
    pub residual: f64,
    /// Every block sup vanished; no exponent could be fitted.
    pub degenerate: bool,
    pub banner: String,
}

/// Per dyadic block `[2^j, 2^(j+1))` the sup of `|ĝ(k)|` over `±k`, and the
/// exponent `s` from `sup ≈ c·k^(−s/2)`.
pub fn fourier_decay_fit(table: &CoefficientTable, band_lo: u64) -> Result<DecayFitReport> {
    if band_lo < 2 {
        return Err(SalemError::invalid("band_lo must be >= 2"));
    }
    let band = table.band as u64;
    if band < band_lo {
        return Err(SalemError::invalid("empty band"));
    }
    let mid = |c: CIv| {
        let a = Iv::pt(c.re.mid()).sqr() + Iv::pt(c.im.mid()).sqr();
        a.sqrt().mid()
    };
    let mut blocks = Vec::new();
    let mut lo = 1u64 << (63 - band_lo.leading_zeros());
    while lo <= band {
        let hi = (2 * lo - 1).min(band);
        let (mut sup, mut width) = (0.0f64, 0.0f64);
        for k in lo.max(band_lo)..=hi {
            for kk in [k as i64, -(k as i64)] {
                let c = table.get(kk).expect("inside band");
                sup = sup.max(mid(c));
                width = width.max(c.abs_hi() - c.abs_lo());
            }
        }
        blocks.push(BlockSup { lo, hi, sup, width });
        lo *= 2;
    }
    let used: Vec<&BlockSup> = blocks.iter().filter(|b| b.sup > 0.0).collect();
    let (fitted_s, residual, degenerate) = if used.len() < 2 {
        (0.0, 0.0, true)
    } else {
        let x: Vec<f64> = used.iter().map(|b| ((b.lo + b.hi) as f64 / 2.0).log2()).collect();
        let y: Vec<f64> = used.iter().map(|b| b.sup.log2()).collect();
        let (slope, _, rms) = least_squares(&x, &y);
        let spread = used.iter().map(|b| (1.0 + b.width / b.sup).log2()).fold(0.0, f64::max);
        ((-2.0 * slope).clamp(0.0, 2.0), rms + spread, false)
    };
    Ok(DecayFitReport { band_lo, band_hi: band, fitted_s, blocks, residual, degenerate, banner: DIAGNOSTIC_BANNER.into() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lemma: String,
    pub parameters: BTreeMap<String, String>,
    pub checked_band: u64,
    /// Largest violation seen; `≤ 0` means the bound held everywhere.
    #[serde(with = "serde_q")]
    pub max_violation: Q,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(lemma: &str, params: &[(&str, String)], band: u64, violation: f64, notes: Vec<String>) -> BoundReport {
        let v = if violation.is_finite() { q_from_f64(violation) } else if violation > 0.0 { Q::from_integer(1.into()) } else { Q::zero() };
        BoundReport::exact(lemma, params, band, v, notes)
    }

    fn exact(lemma: &str, params: &[(&str, String)], band: u64, v: Q, notes: Vec<String>) -> BoundReport {
        let pass = v <= Q::zero();
        BoundReport {
            lemma: lemma.into(),
            parameters: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            checked_band: band,
            max_violation: v,
            pass,
            notes,
        }
    }

    pub fn to_csv_row(&self) -> String {
        format!("{},{},{},{}", self.lemma, self.checked_band, fmt_q(&self.max_violation), self.pass)
    }
}

/// `F̂_M(0) = 1` with a tight enclosure and `F̂_M(k) = 0` exactly for `0 < |k| ≤ M/2`.
pub fn verify_vanishing_window(m: u64, zeta: &Q) -> Result<BoundReport> {
    let z = Xi::Exact(zeta.clone());
    let c0 = fm_coefficient(m, &z, 0)?;
    let dist = if c0.re.contains(1.0) { 0.0 } else { (c0.re.lo - 1.0).abs().max((c0.re.hi - 1.0).abs()) };
    let mut worst = dist.max(c0.re.width() + c0.im.width() - 1e-10).max(c0.im.mag());
    let mut notes = Vec::new();
    for k in 1..=(m / 2) as i64 {
        for kk in [k, -k] {
            let c = fm_coefficient(m, &z, kk)?;
            if !c.is_exact_zero() {
                worst = worst.max(c.abs_hi().max(f64::MIN_POSITIVE));
                notes.push(format!("k={kk} not structurally zero"));
            }
        }
    }
    let params = [("M", m.to_string()), ("zeta", fmt_q(zeta))];
    Ok(BoundReport::new("vanishing_window", &params, m / 2, worst, notes))
}

/// `|F̂_M(k)| ≤ C_N·log|k|/M·(1+ζ|k|/M)^(−N)` for `0 < |k| ≤ band`.
pub fn verify_decay_bound(m: u64, zeta: &Q, n: usize, band: usize) -> Result<BoundReport> {
    let z = Xi::Exact(zeta.clone());
    let t = fm_table(&BigUint::from(m), &z, band, 1 << 24)?;
    let c = cn_bound(n, m)?;
    let zi = Iv::from_q(zeta);
    let mf = Iv::pt(m as f64);
    let mut worst = f64::NEG_INFINITY;
    let mut uncertified = 0usize;
    for k in 1..=band as i64 {
        let kf = Iv::pt(k as f64);
        let rhs = Iv::pt(c) * kf.ln() / mf / (Iv::ONE + zi * kf / mf).powi(n as u32);
        for kk in [k, -k] {
            let v = t.get(kk).expect("inside band");
            worst = worst.max(v.abs_lo() - rhs.hi);
            if v.abs_hi() > rhs.lo {
                uncertified += 1;
            }
        }
    }
    let notes = if uncertified > 0 { vec![format!("{uncertified} points decided only within enclosure slack")] } else { vec![] };
    let params = [("M", m.to_string()), ("zeta", fmt_q(zeta)), ("N", n.to_string()), ("C_N", format!("{c:e}"))];
    Ok(BoundReport::new("decay_bound", &params, band as u64, worst, notes))
}

/// Re-check `|ψ̂G(k) − ψ̂(k)| ≤ ε·g(|k|)` on the band, plus the schedule's
/// gap, tail and middle conditions.
pub fn verify_effective_g(s: &KaufmanSchedule, psi: &CoefficientTable, band: usize, max_sieve: u64) -> Result<BoundReport> {
    let (gap, tail, middle) = verify_schedule(s);
    let r = check_conclusion(psi, s, band, max_sieve)?;
    let mut worst = r.worst_ratio - 1.0;
    let mut notes = vec![format!("worst ratio {:e} at k={}", r.worst_ratio, r.worst_k)];
    for (ok, name) in [(gap, "gap"), (tail, "tail"), (middle, "middle")] {
        if !ok {
            worst = worst.max(1.0);
            notes.push(format!("{name} condition fails"));
        }
    }
    let params = [("alpha", fmt_q(&s.alpha)), ("epsilon", fmt_q(&s.epsilon)), ("N", s.n_terms.to_string())];
    Ok(BoundReport::new("effective_g", &params, band as u64, worst, notes))
}

/// Certified `Σ diam(H_i)^(2^(−k)) ≤ 2^(−k)` for every shrink stage.
pub fn verify_cover_sum(trace: &GTrace) -> Result<BoundReport> {
    let mut worst: Option<Q> = None;
    let mut notes = Vec::new();
    for st in &trace.stages {
        if let Some((bound, ok)) = st.cover_sum()? {
            let v = &bound - pow2(-(st.k as i64));
            if !ok {
                notes.push(format!("stage {} sum bound exceeds 2^-{}", st.k, st.k));
            }
            worst = Some(match worst {
                Some(w) if w >= v => w,
                _ => v,
            });
        }
    }
    let params = [("q", fmt_q(&trace.q)), ("x", trace.x.iter().map(|b| b.to_string()).collect::<String>())];
    Ok(BoundReport::exact("cover_sum", &params, trace.k, worst.unwrap_or_else(Q::zero), notes))
}
