//! Decay profile `g`, the averaging constants, and the schedule `Θ`.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::coeffs::{average, cn_bound_uniform, convolve, fm_table, fm_zeta, CoefficientTable};
use crate::enclosure::{ln2, ln_uint, Iv};
use crate::error::{Result, SalemError};
use crate::rat::{ceil_q, iroot, q_from_f64, serde_big, serde_big_vec, serde_q, serde_q_opt, to_uint, Q};

/// `α = a/b` in lowest terms, `α ≥ 0`.
pub(crate) fn alpha_parts(alpha: &Q) -> Result<(u32, u32)> {
    if alpha < &Q::zero() {
        return Err(SalemError::invalid("alpha must be nonnegative"));
    }
    let a = alpha.numer().to_u32().ok_or_else(|| SalemError::invalid("alpha numerator too large"))?;
    let b = alpha.denom().to_u32().ok_or_else(|| SalemError::invalid("alpha denominator too large"))?;
    Ok((a, b))
}

/// Enclosure of `x₀ = e^(2+α)`.
pub fn x0_enclosure(alpha: &Q) -> Iv {
    (Iv::pt(2.0) + Iv::from_q(alpha)).exp()
}

fn g_formula(lnx: Iv, e: Iv) -> Iv {
    (-(lnx / e)).exp() * lnx
}

/// `g` given an enclosure of `ln x`.
pub fn g_from_ln(lnx: Iv, alpha: &Q) -> Iv {
    let e = Iv::pt(2.0) + Iv::from_q(alpha);
    let plateau = e * Iv::pt(-1.0).exp();
    if lnx.hi <= e.lo {
        plateau
    } else if lnx.lo >= e.hi {
        g_formula(lnx, e)
    } else {
        g_formula(Iv::new(lnx.lo.max(e.lo), lnx.hi), e).hull(plateau)
    }
}

/// Enclosure of `g(x) = x^(−1/(2+α))·log x` above `x₀`, `g(x₀)` below.
pub fn g_function(x: &Q, alpha: &Q) -> Iv {
    let xi = Iv::from_q(x);
    if xi.hi <= 1.0 {
        return g_from_ln(Iv::new(f64::NEG_INFINITY, 0.0), alpha);
    }
    let lnx = if xi.lo <= 0.0 { Iv::new(f64::NEG_INFINITY, xi.ln().hi) } else { xi.ln() };
    g_from_ln(lnx, alpha)
}

/// Upper bound on `max_{s>0} log(s)/(1+s)²`.
pub fn log_ratio_max() -> f64 {
    static H: OnceLock<f64> = OnceLock::new();
    *H.get_or_init(|| {
        // nonpositive for s ≤ 1, and below log(64)/65² past 64
        let step = 1.0 / 64.0;
        let mut best = (Iv::pt(64.0).ln() / Iv::pt(65.0).sqr()).hi;
        for i in 0..63 * 64 {
            let a = 1.0 + i as f64 * step;
            let ub = Iv::pt(a + step).ln() / (Iv::pt(1.0 + a)).sqr();
            best = best.max(ub.hi);
        }
        best
    })
}

/// `T_α = 2 + α + max_{s>0} log(s)/(1+s)²`, an upper bound.
pub fn t_alpha(alpha: &Q) -> f64 {
    (Iv::pt(2.0) + Iv::from_q(alpha) + Iv::pt(log_ratio_max())).hi
}

/// Constants bounding `|(ψF_M)^(k) − ψ̂(k)|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertifiedConstants {
    /// `(N, η_{ψ,N})`.
    pub eta: Vec<(usize, f64)>,
    /// `(N, B_{ψ,N}, M₀)`.
    pub b: Vec<(usize, f64, u64)>,
    /// `(N, C_N)` valid for every `M ≥ M̃`.
    pub c_n: Vec<(usize, f64)>,
    pub a_psi: f64,
    pub t_alpha: f64,
    pub c_prime: f64,
    pub c_double: f64,
    pub c: f64,
    pub m_tilde: u64,
}

/// `C = max(A_ψC₂T_α, 4A_ψC₂ + 4B_{ψ,3})` and `M̃`. The last term carries
/// the factor 4 from applying the tail bound at `M = |k|/2`.
pub fn estimate_fm_constants(psi: &CoefficientTable, alpha: &Q) -> Result<CertifiedConstants> {
    alpha_parts(alpha)?;
    let mut eta = Vec::new();
    for n in 0..=3 {
        eta.push((n, psi.eta(n)?));
    }
    let mut b = Vec::new();
    for n in 2..=3 {
        let (bn, m0) = psi.tail_bound_n(n)?;
        b.push((n, bn, m0));
    }
    let m_tilde = b[1].2.max(3);
    let c_n: Vec<(usize, f64)> = (1..=3).map(|n| Ok((n, cn_bound_uniform(n, m_tilde)?))).collect::<Result<_>>()?;
    let a_psi = psi.a_bound();
    let c2 = Iv::pt(c_n[1].1);
    let t = t_alpha(alpha);
    let a = Iv::pt(a_psi);
    let c_prime = (a * c2 * Iv::pt(t)).hi;
    let c_double = (Iv::pt(4.0) * a * c2 + Iv::pt(4.0) * Iv::pt(b[1].1)).hi;
    Ok(CertifiedConstants {
        eta,
        b,
        c_n,
        a_psi,
        t_alpha: t,
        c_prime,
        c_double,
        c: c_prime.max(c_double),
        m_tilde,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub max_m_bits: u64,
    pub max_sieve: u64,
    pub max_terms: u64,
    pub max_intervals: usize,
    /// Band of coefficient tables built along the way.
    pub band: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_m_bits: 1 << 17, max_sieve: 1 << 24, max_terms: 4096, max_intervals: 1 << 20, band: 256 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Certified,
    Demo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub kind: ModeKind,
    /// Demo only: replaces `C`; defaults to `ε/8`.
    #[serde(with = "serde_q_opt", default)]
    pub relaxed_c: Option<Q>,
    /// Stage offsets are `⌈m0_scale·x₀⌉ + m`.
    pub m0_scale: u64,
    pub caps: Caps,
}

impl Mode {
    pub fn certified(caps: Caps) -> Mode {
        Mode { kind: ModeKind::Certified, relaxed_c: None, m0_scale: 10, caps }
    }

    pub fn demo(relaxed_c: Option<Q>, caps: Caps) -> Mode {
        Mode { kind: ModeKind::Demo, relaxed_c, m0_scale: 10, caps }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KaufmanSchedule {
    #[serde(with = "serde_q")]
    pub alpha: Q,
    #[serde(with = "serde_q")]
    pub epsilon: Q,
    #[serde(with = "serde_big")]
    pub m0: BigUint,
    pub n_terms: u64,
    #[serde(with = "serde_big")]
    pub m_prime: BigUint,
    #[serde(with = "serde_big_vec")]
    pub ms: Vec<BigUint>,
    pub constants: Option<CertifiedConstants>,
    /// The `C` actually used; differs from `constants.c` only in demo mode.
    #[serde(with = "serde_q")]
    pub c_used: Q,
    pub mode: ModeKind,
    pub gap_ok: bool,
    pub tail_ok: bool,
    pub middle_ok: bool,
}

fn ln_q(x: &Q) -> Iv {
    Iv::from_q(x).ln()
}

/// Smallest `M` with `M > 2·Mj^(2+α)`, i.e. `M^b > 2^b·Mj^(2b+a)`.
fn gap_min(mj: &BigUint, a: u32, b: u32) -> BigUint {
    let rhs = (BigUint::one() << b) * mj.pow(2 * b + a);
    iroot(&rhs, b) + 1u32
}

fn gap_holds(lo: &BigUint, hi: &BigUint, a: u32, b: u32) -> bool {
    hi.pow(b) > (BigUint::one() << b) * lo.pow(2 * b + a)
}

/// `(C/N)·Σ_{i≤j} M_i^(3+2α) ≤ (ε/4)·M_{j+1}^((3+2α)/(2+α))`, which gives the
/// partial tail condition since each `E_i(k) ≤ C·log|k|·M_i^(3+2α)/|k|²`
/// past `2M_i^(2+α)`.
fn tail_holds(prefix: &[BigUint], next: &BigUint, c: &Q, n: u64, eps: &Q, alpha: &Q) -> bool {
    let al = Iv::from_q(alpha);
    let w = Iv::pt(3.0) + Iv::pt(2.0) * al;
    let ls: Vec<Iv> = prefix.iter().map(|m| w * ln_uint(m)).collect();
    let mx = ls.iter().map(|l| l.hi).fold(f64::NEG_INFINITY, f64::max);
    let sum = ls.iter().fold(Iv::ZERO, |s, l| s + (*l - Iv::pt(mx)).exp());
    let lhs = ln_q(c) - Iv::pt(n as f64).ln() + Iv::pt(mx) + sum.ln();
    let rhs = ln_q(&(eps / Q::from_integer(4.into()))) + w / (Iv::pt(2.0) + al) * ln_uint(next);
    lhs.hi <= rhs.lo
}

/// `(C/N)·log M_j/M_j ≤ (ε/4)·g(2M_j^(2+α))`, the bound used for
/// `M_j < |k| ≤ 2M_j^(2+α)`.
fn middle_holds(mj: &BigUint, c: &Q, n: u64, eps: &Q, alpha: &Q) -> bool {
    let lm = ln_uint(mj);
    let e = Iv::pt(2.0) + Iv::from_q(alpha);
    let l2 = ln2() + e * lm;
    let lhs = ln_q(c) - Iv::pt(n as f64).ln() + lm.ln() - lm;
    let rhs = ln_q(&(eps / Q::from_integer(4.into()))) + l2.ln() - l2 / e;
    lhs.hi <= rhs.lo
}

/// `Θ(α, ψ, ε, M₀)`: `N` and `M₁ < … < M_N` with `C/N < ε/4`,
/// `M₁ ≥ M′`, the gap condition and the partial tail condition.
pub fn theta_schedule(alpha: &Q, psi: &CoefficientTable, epsilon: &Q, m0: &BigUint, mode: &Mode) -> Result<KaufmanSchedule> {
    let (a, b) = alpha_parts(alpha)?;
    if epsilon <= &Q::zero() {
        return Err(SalemError::invalid("epsilon must be positive"));
    }
    let x0 = x0_enclosure(alpha);
    if Q::from_integer(BigInt::from(m0.clone())) <= q_from_f64(x0.hi) {
        return Err(SalemError::invalid("M0 must exceed x0 = e^(2+alpha)"));
    }
    let caps = &mode.caps;
    let constants = match mode.kind {
        ModeKind::Certified => Some(estimate_fm_constants(psi, alpha)?),
        ModeKind::Demo => estimate_fm_constants(psi, alpha).ok(),
    };
    let c = match mode.kind {
        ModeKind::Certified => {
            let c = constants.as_ref().expect("certified constants").c;
            if !c.is_finite() {
                return Err(SalemError::infeasible("constant C is not finite in double range"));
            }
            q_from_f64(c)
        }
        ModeKind::Demo => mode.relaxed_c.clone().unwrap_or_else(|| epsilon / Q::from_integer(8.into())),
    };
    if c <= Q::zero() {
        return Err(SalemError::invalid("C must be positive"));
    }
    let m_tilde = constants.as_ref().map(|k| k.m_tilde).unwrap_or(3);
    let ratio = Q::from_integer(4.into()) * &c / epsilon;
    let n_big: BigInt = ratio.floor().to_integer() + 1;
    let n = n_big
        .to_u64()
        .filter(|&n| n <= caps.max_terms)
        .ok_or_else(|| SalemError::infeasible(format!("N = {n_big} exceeds max_terms")))?;
    // M′^(1+α) ≥ (4C/ε)^(2+α)
    let target = to_uint(&ceil_q(&num_traits::Pow::pow(&ratio, 2 * b + a)));
    let mut m_prime = iroot(&target, a + b);
    if m_prime.pow(a + b) < target {
        m_prime += 1u32;
    }
    let mut m1 = (m0 + 1u32).max(m_prime.clone()).max(BigUint::from(m_tilde));
    if m1.is_zero() {
        m1 = BigUint::one();
    }
    let mut ms = vec![m1];
    let too_big = |m: &BigUint| m.bits() > caps.max_m_bits;
    while (ms.len() as u64) < n {
        let mut next = gap_min(ms.last().unwrap(), a, b);
        while !tail_holds(&ms, &next, &c, n, epsilon, alpha) {
            next <<= 1;
            if too_big(&next) {
                break;
            }
        }
        if too_big(&next) {
            return Err(SalemError::infeasible(format!("M_{} exceeds {} bits", ms.len() + 1, caps.max_m_bits)));
        }
        ms.push(next);
    }
    let mut sched = KaufmanSchedule {
        alpha: alpha.clone(),
        epsilon: epsilon.clone(),
        m0: m0.clone(),
        n_terms: n,
        m_prime,
        ms,
        constants,
        c_used: c,
        mode: mode.kind,
        gap_ok: false,
        tail_ok: false,
        middle_ok: false,
    };
    let (g, t, m) = verify_schedule(&sched);
    sched.gap_ok = g;
    sched.tail_ok = t;
    sched.middle_ok = m;
    Ok(sched)
}

/// Recheck (gap, partial tail, middle) conditions of a schedule.
pub fn verify_schedule(s: &KaufmanSchedule) -> (bool, bool, bool) {
    let Ok((a, b)) = alpha_parts(&s.alpha) else { return (false, false, false) };
    let gap = s.ms.windows(2).all(|w| gap_holds(&w[0], &w[1], a, b)) && s.ms.first().is_some_and(|m1| m1 > &s.m0);
    let tail = (1..s.ms.len()).all(|j| tail_holds(&s.ms[..j], &s.ms[j], &s.c_used, s.n_terms, &s.epsilon, &s.alpha));
    let middle = s.ms.iter().all(|m| middle_holds(m, &s.c_used, s.n_terms, &s.epsilon, &s.alpha));
    (gap, tail, middle)
}

/// `G = N⁻¹ Σ F_{M_i}` on `[−band, band]`.
pub fn schedule_density(s: &KaufmanSchedule, band: usize, max_sieve: u64) -> Result<CoefficientTable> {
    let tables = s
        .ms
        .iter()
        .map(|m| fm_table(m, &fm_zeta(m, &s.alpha), band, max_sieve))
        .collect::<Result<Vec<_>>>()?;
    average(&tables)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConclusionReport {
    pub band: usize,
    /// Largest `|ψ̂G(k) − ψ̂(k)| / (ε·g(|k|))` upper bound seen.
    pub worst_ratio: f64,
    pub worst_k: i64,
    pub ok: bool,
}

/// Check `|ψ̂G(k) − ψ̂(k)| ≤ ε·g(|k|)` for `|k| ≤ band`.
pub fn check_conclusion(psi: &CoefficientTable, s: &KaufmanSchedule, band: usize, max_sieve: u64) -> Result<ConclusionReport> {
    let g = schedule_density(s, band + psi.band, max_sieve)?;
    let prod = convolve(psi, &g, band)?;
    let eps = Iv::from_q(&s.epsilon);
    let mut worst = 0.0f64;
    let mut worst_k = 0;
    let mut ok = true;
    for k in -(band as i64)..=band as i64 {
        let base = psi.get(k).unwrap_or(crate::enclosure::CIv::ZERO);
        let diff = (prod.get(k).unwrap() - base).abs_hi();
        let bound = (eps * g_function(&Q::from_integer(k.abs().into()), &s.alpha)).lo;
        if diff > bound {
            ok = false;
        }
        let r = diff / bound;
        if r > worst {
            worst = r;
            worst_k = k;
        }
    }
    Ok(ConclusionReport { band, worst_ratio: worst, worst_k, ok })
}

/// Stage offset `⌈scale·x₀⌉ + m`.
pub fn stage_m0(alpha: &Q, scale: u64, m: u64) -> BigUint {
    let x = Iv::pt(scale as f64) * x0_enclosure(alpha);
    let v = ceil_q(&q_from_f64(x.hi));
    to_uint(&v) + m
}
