//! Fourier coefficient tables on the torus, decay constants, and the
//! windowed prime averages `F_M^ζ`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::bump::{bump, Xi, MAX_ORDER};
use super::primes::{prime_window, small_primes};
use crate::enclosure::{ln_uint, two_pi, CIv, Iv};
use crate::error::{Result, SalemError};
use crate::rat::Q;

/// Coefficients `ĝ(k)` for `|k| ≤ band`, plus what is known beyond.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub band: usize,
    coeffs: Vec<CIv>,
    /// Upper bound on `Σ_{|k|>band} |ĝ(k)|`.
    pub tail_bound: f64,
    /// Upper bounds on `‖g^(j)‖₁`, `j = 0, 1, …`; empty when unknown.
    #[serde(default)]
    pub deriv_norms: Vec<f64>,
}

fn up_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else if !a.is_finite() || !b.is_finite() {
        f64::INFINITY
    } else {
        (Iv::pt(a) * Iv::pt(b)).hi
    }
}

fn up_add(a: f64, b: f64) -> f64 {
    if !a.is_finite() || !b.is_finite() {
        f64::INFINITY
    } else {
        (Iv::pt(a) + Iv::pt(b)).hi
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sup norm of `f^(i)` from L¹ norms of a periodic function.
fn sup_norm(norms: &[f64], i: usize) -> Option<f64> {
    match i {
        0 => Some(up_add(*norms.first()?, *norms.get(1)?)),
        _ => norms.get(i + 1).copied(),
    }
}

/// Leibniz bound on `‖(fg)^(j)‖₁`, for as many orders as the inputs allow.
pub fn product_norms(f: &[f64], g: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    'order: for j in 0..f.len().max(g.len()) {
        let mut total = 0.0;
        for i in 0..=j {
            let a = sup_norm(f, i).zip(g.get(j - i)).map(|(s, n)| up_mul(s, *n));
            let b = f.get(i).zip(sup_norm(g, j - i)).map(|(n, s)| up_mul(*n, s));
            let term = match (a, b) {
                (Some(x), Some(y)) => x.min(y),
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => break 'order,
            };
            total = up_add(total, up_mul(binom(j, i), term));
        }
        out.push(total);
    }
    out
}

/// `Σ_j C(N,j)‖f^(j)‖₁/(2π)^j`, a bound on `|f̂(x)|(1+|x|)^N`.
pub fn eta_from_norms(norms: &[f64], n: usize) -> Result<f64> {
    if norms.len() <= n {
        return Err(SalemError::invalid(format!("no derivative norm of order {n}")));
    }
    let mut total = 0.0;
    for (j, &nj) in norms.iter().enumerate().take(n + 1) {
        if nj == 0.0 {
            continue;
        }
        if !nj.is_finite() {
            return Ok(f64::INFINITY);
        }
        let t = Iv::pt(binom(n, j)) * Iv::pt(nj) / two_pi().powi(j as u32);
        total = up_add(total, t.hi);
    }
    Ok(total)
}

pub fn phi_norms() -> Vec<f64> {
    let b = bump();
    (0..=MAX_ORDER).map(|n| b.phi_norm(n)).collect()
}

/// `η_{φ,N}` for the bump.
pub fn eta_phi(n: usize) -> Result<f64> {
    eta_from_norms(&phi_norms(), n)
}

/// `B = 4η` and the least `M₀` with `Σ_{|m|≥M} |f̂(m)| ≤ B/M^(N−1)` for `M ≥ M₀`.
pub fn tail_bound_from_eta(eta: f64, n: usize) -> Result<(f64, u64)> {
    if n < 2 {
        return Err(SalemError::invalid("tail bound needs N >= 2"));
    }
    Ok((up_mul(4.0, eta), n as u64 - 2))
}

pub fn phi_tail_bound(n: usize) -> Result<(f64, u64)> {
    tail_bound_from_eta(eta_phi(n)?, n)
}

impl CoefficientTable {
    pub fn new(band: usize, coeffs: Vec<CIv>, tail_bound: f64, deriv_norms: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 2 * band + 1 {
            return Err(SalemError::invalid("coefficient count must be 2·band+1"));
        }
        if tail_bound.is_nan() || tail_bound < 0.0 {
            return Err(SalemError::invalid("tail bound must be nonnegative"));
        }
        Ok(CoefficientTable { band, coeffs, tail_bound, deriv_norms })
    }

    /// Coefficients of the constant function 1.
    pub fn delta(band: usize) -> Self {
        let mut coeffs = vec![CIv::ZERO; 2 * band + 1];
        coeffs[band] = CIv::ONE;
        let mut norms = vec![0.0; MAX_ORDER + 1];
        norms[0] = 1.0;
        CoefficientTable { band, coeffs, tail_bound: 0.0, deriv_norms: norms }
    }

    pub fn get(&self, k: i64) -> Option<CIv> {
        if k.unsigned_abs() as usize > self.band {
            return None;
        }
        Some(self.coeffs[(k + self.band as i64) as usize])
    }

    pub fn coeffs(&self) -> &[CIv] {
        &self.coeffs
    }

    pub fn is_band_limited(&self) -> bool {
        self.tail_bound == 0.0
    }

    pub fn is_hermitian(&self) -> bool {
        let overlap = |a: Iv, b: Iv| a.lo <= b.hi && b.lo <= a.hi;
        let c0 = self.coeffs[self.band];
        if !(c0.im.lo <= 0.0 && 0.0 <= c0.im.hi) {
            return false;
        }
        (1..=self.band as i64).all(|k| {
            let a = self.get(k).unwrap();
            let b = self.get(-k).unwrap().conj();
            overlap(a.re, b.re) && overlap(a.im, b.im)
        })
    }

    fn band_sup(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs_hi()).fold(0.0, f64::max)
    }

    /// Upper bound on `sup_k |ĝ(k)|` over all of `ℤ`.
    pub fn sup_abs(&self) -> f64 {
        self.band_sup().max(self.tail_bound)
    }

    /// Upper bound on `Σ_{|k|>r} |ĝ(k)|`.
    pub fn mass_beyond(&self, r: usize) -> f64 {
        let mut total = self.tail_bound;
        for k in r + 1..=self.band {
            let k = k as i64;
            total = up_add(total, self.get(k).unwrap().abs_hi());
            total = up_add(total, self.get(-k).unwrap().abs_hi());
        }
        total
    }

    /// `A = Σ_k |ĝ(k)|` upper bound.
    pub fn a_bound(&self) -> f64 {
        up_add(self.coeffs[self.band].abs_hi(), self.mass_beyond(0))
    }

    /// The trigonometric polynomial keeping only `|k| ≤ band`; a new function.
    pub fn truncated(&self, band: usize) -> Self {
        let band = band.min(self.band);
        let coeffs = self.coeffs[self.band - band..=self.band + band].to_vec();
        let mut norms = Vec::new();
        for j in 0..=MAX_ORDER {
            let mut s = 0.0;
            for (i, c) in coeffs.iter().enumerate() {
                let k = (i as i64 - band as i64).unsigned_abs() as f64;
                let w = (two_pi() * Iv::pt(k)).powi(j as u32).hi;
                s = up_add(s, up_mul(c.abs_hi(), w));
            }
            norms.push(s);
        }
        CoefficientTable { band, coeffs, tail_bound: 0.0, deriv_norms: norms }
    }

    /// The same function described on a smaller band.
    pub fn restricted(&self, band: usize) -> Self {
        let band = band.min(self.band);
        let tail = self.mass_beyond(band);
        let coeffs = self.coeffs[self.band - band..=self.band + band].to_vec();
        CoefficientTable { band, coeffs, tail_bound: tail, deriv_norms: self.deriv_norms.clone() }
    }

    /// `η_{g,N}` with `|ĝ(k)| ≤ η/(1+|k|)^N`.
    pub fn eta(&self, n: usize) -> Result<f64> {
        if self.is_band_limited() {
            let mut best = 0.0f64;
            for (i, c) in self.coeffs.iter().enumerate() {
                let k = (i as i64 - self.band as i64).unsigned_abs() as f64;
                let w = Iv::pt(1.0 + k).powi(n as u32).hi;
                best = best.max(up_mul(c.abs_hi(), w));
            }
            return Ok(best);
        }
        eta_from_norms(&self.deriv_norms, n)
            .map_err(|_| SalemError::invalid("table has a tail and no derivative norms"))
    }

    pub fn tail_bound_n(&self, n: usize) -> Result<(f64, u64)> {
        tail_bound_from_eta(self.eta(n)?, n)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# band={} tail_bound={}\nk,re_lo,re_hi,im_lo,im_hi\n", self.band, self.tail_bound);
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = i as i64 - self.band as i64;
            let _ = writeln!(s, "{k},{},{},{},{}", c.re.lo, c.re.hi, c.im.lo, c.im.hi);
        }
        s
    }
}

const COUNT_CAP: u64 = 1 << 20;

struct WindowCounts {
    /// `π(n)` for `n ≤ COUNT_CAP`.
    pi: Vec<u32>,
    /// `sup_{M' ≥ M} M'/(|P_M'| log(M'/2))`, upper bounds.
    ratio_sup: Vec<f64>,
}

fn window_counts() -> &'static WindowCounts {
    static W: OnceLock<WindowCounts> = OnceLock::new();
    W.get_or_init(|| {
        let cap = COUNT_CAP as usize;
        let mut pi = vec![0u32; cap + 1];
        for p in small_primes(COUNT_CAP) {
            pi[p as usize] += 1;
        }
        for i in 1..=cap {
            pi[i] += pi[i - 1];
        }
        // beyond the cap: π(x) > x/log x for x ≥ 17 and π(x) < 1.25506·x/log x
        let c = Iv::pt(COUNT_CAP as f64);
        let frac = (c * Iv::pt(0.5)).ln() / c.ln();
        let beyond = (Iv::ONE / (frac - Iv::pt(1.25506) * Iv::pt(0.5))).hi;
        let mut ratio_sup = vec![0.0; cap + 1];
        let mut run = beyond;
        for m in (3..=cap).rev() {
            let count = pi[m] - pi[m / 2];
            let r = Iv::pt(m as f64) / (Iv::pt(count as f64) * Iv::pt(m as f64 * 0.5).ln());
            run = run.max(r.hi);
            ratio_sup[m] = run;
        }
        WindowCounts { pi, ratio_sup }
    })
}

/// `|P_M|`, exact.
pub fn window_size(m: u64) -> Result<u64> {
    if m <= 2 {
        return Err(SalemError::invalid("prime window needs M > 2"));
    }
    if m <= COUNT_CAP {
        let w = window_counts();
        return Ok((w.pi[m as usize] - w.pi[(m / 2) as usize]) as u64);
    }
    Ok(prime_window(m)?.len() as u64)
}

/// A constant `C_N` with `|F̂_M^ζ(k)| ≤ C_N·log|k|/M·(1+ζ|k|/M)^(−N)` for
/// `k ≠ 0`: a member of `P_M` dividing `k` exceeds `M/2`, so at most
/// `log|k|/log(M/2)` of them do.
pub fn cn_bound(n: usize, m: u64) -> Result<f64> {
    let size = window_size(m)?;
    let eta = eta_phi(n)?;
    let r = Iv::pt(eta) * Iv::pt(m as f64) / (Iv::pt(size as f64) * Iv::pt(m as f64 * 0.5).ln());
    Ok(r.hi)
}

/// `sup_{M ≥ m_min} cn_bound(N, M)`, certified past the sieve range by
/// explicit prime counting bounds.
pub fn cn_bound_uniform(n: usize, m_min: u64) -> Result<f64> {
    let w = window_counts();
    let m = m_min.max(3).min(COUNT_CAP) as usize;
    Ok(up_mul(eta_phi(n)?, w.ratio_sup[m]))
}

/// `ζ = M^(−1−α)`, exact when `α` is an integer.
pub fn fm_zeta(m: &BigUint, alpha: &Q) -> Xi {
    if alpha.is_integer() {
        let e = alpha.to_integer().to_u32().expect("small alpha") + 1;
        let den = num_bigint::BigInt::from(m.pow(e));
        Xi::Exact(Q::new(1.into(), den))
    } else {
        let e = Iv::ONE + Iv::from_q(alpha);
        Xi::Approx((-(e * ln_uint(m))).exp())
    }
}

fn xi_iv(x: &Xi) -> Iv {
    match x {
        Xi::Exact(q) => Iv::from_q(q),
        Xi::Approx(iv) => *iv,
    }
}

fn xi_times(x: &Xi, l: u64) -> Xi {
    match x {
        Xi::Exact(q) => Xi::Exact(q * Q::from_integer(l.into())),
        Xi::Approx(iv) => Xi::Approx(*iv * Iv::from_int(l as i64)),
    }
}

/// Enclosure of `F̂_M^ζ(k) = |P_M|^(−1) Σ_{p∈P_M, p|k} φ̂(ζk/p)`.
pub fn fm_coefficient(m: u64, zeta: &Xi, k: i64) -> Result<CIv> {
    let window = prime_window(m)?;
    if k == 0 {
        return Ok(CIv::ONE);
    }
    let ka = k.unsigned_abs();
    let mut acc = CIv::ZERO;
    let mut hit = false;
    for &p in window.iter().filter(|&&p| ka % p == 0) {
        acc = acc + bump().phi_hat(xi_times(zeta, ka / p));
        hit = true;
    }
    if !hit {
        return Ok(CIv::ZERO);
    }
    let v = acc.scale(Iv::ONE / Iv::pt(window.len() as f64));
    Ok(if k < 0 { v.conj() } else { v })
}

/// Upper bounds on `‖(F_M^ζ)^(j)‖₁ ≤ (M/ζ)^j‖φ^(j)‖₁`.
fn fm_norms(m: &BigUint, zeta: &Xi) -> Vec<f64> {
    let scale = ln_uint(m) - xi_iv(zeta).ln();
    phi_norms()
        .iter()
        .enumerate()
        .map(|(j, &nj)| if j == 0 { nj } else { up_mul((scale * Iv::pt(j as f64)).exp().hi, nj) })
        .collect()
}

/// `(1/|P|)Σ_p 2η_N(1+ζL_p)^(1−N)/(ζ(N−1))` minimised over `N`, with
/// `L_p = ⌊band/p⌋`; `ls` lists the `L_p`.
fn fm_tail(zeta_lo: f64, ls: &[u64]) -> f64 {
    if zeta_lo <= 0.0 {
        return f64::INFINITY;
    }
    let z = Iv::pt(zeta_lo);
    let mut best = f64::INFINITY;
    for n in 2..=MAX_ORDER {
        let eta = Iv::pt(eta_phi(n).expect("order within range"));
        let mut total = Iv::ZERO;
        for &l in ls {
            let base = Iv::ONE + z * Iv::pt(l as f64);
            let t = Iv::pt(2.0) * eta / (base.powi(n as u32 - 1) * z * Iv::pt((n - 1) as f64));
            total = total + t;
        }
        let avg = total / Iv::pt(ls.len().max(1) as f64);
        best = best.min(avg.hi);
    }
    best
}

/// Table of `F_M^ζ` on `[−band, band]`.
pub fn fm_table(m: &BigUint, zeta: &Xi, band: usize, max_sieve: u64) -> Result<CoefficientTable> {
    if *m <= BigUint::from(2u32) {
        return Err(SalemError::invalid("F_M needs M > 2"));
    }
    let zi = xi_iv(zeta);
    let in_range = match zeta {
        Xi::Exact(z) => z.is_positive() && *z <= Q::one(),
        Xi::Approx(iv) => iv.hi > 0.0 && iv.lo >= 0.0 && iv.lo <= 1.0,
    };
    if !in_range {
        return Err(SalemError::invalid("zeta must lie in (0, 1]"));
    }
    let norms = fm_norms(m, zeta);
    let mut coeffs = vec![CIv::ZERO; 2 * band + 1];
    coeffs[band] = CIv::ONE;
    if *m > BigUint::from(2 * band as u64) {
        // no member of the window divides a nonzero |k| ≤ band
        let tail = fm_tail(zi.lo, &[0]);
        return CoefficientTable::new(band, coeffs, tail, norms);
    }
    let m64 = m.to_u64().filter(|&v| v <= max_sieve).ok_or_else(|| SalemError::infeasible("prime window beyond sieve cap"))?;
    let window = prime_window(m64)?;
    let mut hits: Vec<Vec<u64>> = vec![Vec::new(); band + 1];
    for &p in &window {
        for l in 1..=(band as u64 / p) {
            hits[(p * l) as usize].push(l);
        }
    }
    let mut cache: HashMap<u64, CIv> = HashMap::new();
    let inv = Iv::ONE / Iv::pt(window.len() as f64);
    for (k, ls) in hits.iter().enumerate().skip(1) {
        if ls.is_empty() {
            continue;
        }
        let mut acc = CIv::ZERO;
        for &l in ls {
            let v = *cache.entry(l).or_insert_with(|| bump().phi_hat(xi_times(zeta, l)));
            acc = acc + v;
        }
        let v = acc.scale(inv);
        coeffs[band + k] = v;
        coeffs[band - k] = v.conj();
    }
    let ls: Vec<u64> = window.iter().map(|&p| band as u64 / p).collect();
    CoefficientTable::new(band, coeffs, fm_tail(zi.lo, &ls), norms)
}

/// Coefficients of the mean of the given functions.
pub fn average(tables: &[CoefficientTable]) -> Result<CoefficientTable> {
    let first = tables.first().ok_or_else(|| SalemError::invalid("average of no tables"))?;
    if tables.iter().any(|t| t.band != first.band) {
        return Err(SalemError::invalid("tables differ in band"));
    }
    let inv = Iv::ONE / Iv::pt(tables.len() as f64);
    let mut coeffs = vec![CIv::ZERO; 2 * first.band + 1];
    let mut tail = 0.0;
    for t in tables {
        for (c, x) in coeffs.iter_mut().zip(&t.coeffs) {
            *c = *c + *x;
        }
        tail = up_add(tail, t.tail_bound);
    }
    let coeffs = coeffs.into_iter().map(|c| if c.is_exact_zero() { c } else { c.scale(inv) }).collect();
    let len = tables.iter().map(|t| t.deriv_norms.len()).min().unwrap_or(0);
    let norms = (0..len)
        .map(|j| tables.iter().fold(0.0, |s, t| up_add(s, t.deriv_norms[j])))
        .map(|s| up_mul(s, inv.hi))
        .collect();
    CoefficientTable::new(first.band, coeffs, up_mul(tail, inv.hi), norms)
}

/// Coefficients of the product `ab` on `[−band, band]`, i.e. the
/// convolution of the two tables with truncation error carried along.
pub fn convolve(a: &CoefficientTable, b: &CoefficientTable, band: usize) -> Result<CoefficientTable> {
    let (ka, kb) = (a.band as i64, b.band as i64);
    let sup_b = b.sup_abs();
    // running maxima of |â(m)| from either end, for the offsets m with |k−m| > kb
    let abs_a: Vec<f64> = a.coeffs.iter().map(|c| c.abs_hi()).collect();
    let mut from_lo = abs_a.clone();
    for i in 1..from_lo.len() {
        from_lo[i] = from_lo[i].max(from_lo[i - 1]);
    }
    let mut from_hi = abs_a;
    for i in (0..from_hi.len().saturating_sub(1)).rev() {
        from_hi[i] = from_hi[i].max(from_hi[i + 1]);
    }
    let outside_sup = |k: i64| {
        let mut s = 0.0f64;
        let below = k - kb - 1;
        if below >= -ka {
            s = s.max(from_lo[(below.min(ka) + ka) as usize]);
        }
        let above = k + kb + 1;
        if above <= ka {
            s = s.max(from_hi[(above.max(-ka) + ka) as usize]);
        }
        s
    };
    let coeff = |k: i64| {
        let mut acc = CIv::ZERO;
        for m in (-ka).max(k - kb)..=ka.min(k + kb) {
            let x = a.coeffs[(m + ka) as usize];
            if x.is_exact_zero() {
                continue;
            }
            let y = b.coeffs[(k - m + kb) as usize];
            if y.is_exact_zero() {
                continue;
            }
            acc = acc + x * y;
        }
        let mut err = 0.0;
        if a.tail_bound > 0.0 {
            err = up_add(err, up_mul(a.tail_bound, sup_b));
        }
        if b.tail_bound > 0.0 && k.abs() + ka > kb {
            let sa = outside_sup(k);
            if sa > 0.0 {
                err = up_add(err, up_mul(sa, b.tail_bound));
            }
        }
        if err > 0.0 {
            acc.inflate(err)
        } else {
            acc
        }
    };
    let bi = band as i64;
    let coeffs: Vec<CIv> = (-bi..=bi).map(coeff).collect();
    let tail = if a.is_band_limited() && b.is_band_limited() {
        let mut t = 0.0;
        for k in bi + 1..=ka + kb {
            t = up_add(t, coeff(k).abs_hi());
            t = up_add(t, coeff(-k).abs_hi());
        }
        t
    } else {
        let half = band / 2;
        up_add(up_mul(a.mass_beyond(half), b.a_bound()), up_mul(a.a_bound(), b.mass_beyond(half)))
    };
    CoefficientTable::new(band, coeffs, tail, product_norms(&a.deriv_norms, &b.deriv_norms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kaufman_engine::bump::phi_hat;
    use crate::rat::q;

    fn zeta_sq(m: u64) -> Xi {
        Xi::Exact(q(1, (m * m) as i64))
    }

    #[test]
    fn window_vanishes_and_mass_is_one() {
        for m in [6u64, 8, 10, 12, 16, 20, 32] {
            let z = zeta_sq(m);
            assert_eq!(fm_coefficient(m, &z, 0).unwrap(), CIv::ONE);
            for k in 1..=(m / 2) as i64 {
                assert!(fm_coefficient(m, &z, k).unwrap().is_exact_zero());
                assert!(fm_coefficient(m, &z, -k).unwrap().is_exact_zero());
            }
        }
    }

    #[test]
    fn single_prime_coefficient() {
        let z = Xi::Exact(q(1, 100));
        // ζk/p = (1/100)·7/7
        let v = fm_coefficient(10, &z, 7).unwrap();
        let w = phi_hat(q(1, 100));
        assert!(v.re.lo <= w.re.hi && w.re.lo <= v.re.hi);
        assert!(v.re.width() < 1e-12);
    }

    #[test]
    fn divisor_count_example() {
        let w = prime_window(12).unwrap();
        assert_eq!(w.iter().filter(|&&p| 77 % p == 0).count(), 2);
    }

    #[test]
    fn cn_bound_holds_on_small_band() {
        for m in [6u64, 10, 16] {
            let z = zeta_sq(m);
            let zi = xi_iv(&z);
            let t = fm_table(&BigUint::from(m), &z, 1000, 1 << 20).unwrap();
            for n in [1usize, 2] {
                let c = cn_bound(n, m).unwrap();
                for k in 1..=1000i64 {
                    let lhs = t.get(k).unwrap().abs_lo();
                    let kf = Iv::pt(k as f64);
                    let rhs = Iv::pt(c) * kf.ln() / Iv::pt(m as f64)
                        / (Iv::ONE + zi * kf / Iv::pt(m as f64)).powi(n as u32);
                    assert!(lhs <= rhs.hi, "M={m} N={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn eta_decay_and_monotone() {
        let e2 = eta_phi(2).unwrap();
        for k in 0..=200i64 {
            let v = phi_hat(q(k, 1)).abs_lo();
            assert!(v <= e2 / ((1 + k) * (1 + k)) as f64 * (1.0 + 1e-12));
        }
        let mut prev = 0.0;
        for n in 0..=MAX_ORDER {
            let e = eta_phi(n).unwrap();
            assert!(e >= prev);
            prev = e;
        }
        assert_eq!(eta_phi(0).unwrap(), 1.0);
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(tail_bound_from_eta(1.0, 2).unwrap().1, 0);
        assert_eq!(tail_bound_from_eta(1.0, 3).unwrap().1, 1);
        assert!(tail_bound_from_eta(1.0, 1).is_err());
        let (b, _) = phi_tail_bound(3).unwrap();
        let mut s = 0.0;
        for m in 16..=4096i64 {
            s += 2.0 * phi_hat(q(m, 1)).abs_hi();
        }
        assert!(s <= b / 256.0);
    }

    #[test]
    fn uniform_constant_dominates_pointwise() {
        let u = cn_bound_uniform(2, 8).unwrap();
        for m in 8..2000 {
            assert!(cn_bound(2, m).unwrap() <= u);
        }
    }

    #[test]
    fn convolution_with_delta_is_identity() {
        let m = BigUint::from(12u32);
        let t = fm_table(&m, &zeta_sq(12), 64, 1 << 20).unwrap();
        assert!(t.is_hermitian());
        let d = CoefficientTable::delta(64);
        let p = convolve(&d, &t, 64).unwrap();
        for k in -64..=64 {
            let (x, y) = (p.get(k).unwrap(), t.get(k).unwrap());
            assert!(x.re.lo <= y.re.hi && y.re.lo <= x.re.hi);
        }
        assert!(p.get(0).unwrap().re.contains(1.0));
        assert!(p.is_hermitian());
        // the delta has no mass at offsets reaching past t's band, so nothing is inflated
        for k in -64..=64 {
            let (x, y) = (p.get(k).unwrap(), t.get(k).unwrap());
            assert!(x.re.width() <= 2.0 * y.re.width() + 1e-15, "k={k}");
        }
    }

    #[test]
    fn csv_has_header() {
        let csv = CoefficientTable::delta(2).to_csv();
        assert!(csv.starts_with("# band=2 tail_bound=0\nk,re_lo,re_hi,im_lo,im_hi\n-2,"));
        assert_eq!(csv.lines().count(), 7);
    }
}
