//! Block assemblies `f(p,x)`, `F(p,x)`, `h(x)` and the radial lift.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::g::g_construction_level;
use crate::algebraic_endpoints::EValue;
use crate::error::{Result, SalemError};
use crate::interval_sets::{similarity, union_all, IntervalUnion};
use crate::kaufman_engine::schedule::Mode;
use crate::rat::{pow2, serde_q_vec, Q};

/// Finite name of a left-c.e. real in `[0,1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerRealPrefix {
    #[serde(with = "serde_q_vec")]
    pub qs: Vec<Q>,
}

impl LowerRealPrefix {
    pub fn new(qs: Vec<Q>) -> Result<LowerRealPrefix> {
        if qs.iter().any(|x| *x < Q::zero() || *x > Q::one()) {
            return Err(SalemError::invalid("prefix entries must lie in [0,1]"));
        }
        if qs.windows(2).any(|w| w[0] > w[1]) {
            return Err(SalemError::invalid("prefix must be nondecreasing"));
        }
        Ok(LowerRealPrefix { qs })
    }

    pub fn constant(p: Q, len: usize) -> Result<LowerRealPrefix> {
        LowerRealPrefix::new(vec![p; len])
    }

    /// Best available lower approximation.
    pub fn last(&self) -> Option<&Q> {
        self.qs.last()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMatrixPrefix {
    pub rows: usize,
    pub cols: usize,
    pub bits: Vec<Vec<u8>>,
}

impl BitMatrixPrefix {
    pub fn new(bits: Vec<Vec<u8>>) -> Result<BitMatrixPrefix> {
        let cols = bits.first().map_or(0, |r| r.len());
        if bits.iter().any(|r| r.len() != cols) {
            return Err(SalemError::invalid("rows must have equal length"));
        }
        if bits.iter().flatten().any(|&b| b > 1) {
            return Err(SalemError::invalid("matrix entries must be 0/1"));
        }
        Ok(BitMatrixPrefix { rows: bits.len(), cols, bits })
    }

    pub fn zeros(rows: usize, cols: usize) -> BitMatrixPrefix {
        BitMatrixPrefix { rows, cols, bits: vec![vec![0; cols]; rows] }
    }

    pub fn row(&self, m: usize) -> &[u8] {
        &self.bits[m]
    }
}

/// `Φ(x)(m,n) = max_{i≤m} x(i,n)`.
pub fn phi_saturate(x: &BitMatrixPrefix) -> BitMatrixPrefix {
    let mut bits = x.bits.clone();
    for m in 1..bits.len() {
        for n in 0..x.cols {
            bits[m][n] = bits[m][n].max(bits[m - 1][n]);
        }
    }
    BitMatrixPrefix { rows: x.rows, cols: x.cols, bits }
}

/// Endpoints of `I_n = [2^(−2n−1), 2^(−2n)]`.
pub fn block_interval(n: u64) -> (Q, Q) {
    let n = n as i64;
    (pow2(-2 * n - 1), pow2(-2 * n))
}

fn zero_point() -> IntervalUnion {
    IntervalUnion::point(EValue::zero())
}

/// `{0} ∪ ⋃_{n≤n_max} τ_n g(q_n, x)` at level `k`; `g(0,x) = ∅`.
pub fn f_level(p: &LowerRealPrefix, x: &[u8], k: u64, n_max: u64, mode: &Mode) -> Result<IntervalUnion> {
    if (p.qs.len() as u64) <= n_max {
        return Err(SalemError::invalid(format!("prefix needs more than {n_max} entries")));
    }
    let mut cache: HashMap<Q, IntervalUnion> = HashMap::new();
    let mut parts = vec![zero_point()];
    for n in 0..=n_max {
        let q = &p.qs[n as usize];
        if q.is_zero() {
            continue;
        }
        if !cache.contains_key(q) {
            cache.insert(q.clone(), g_construction_level(q, x, k, mode)?);
        }
        let (lo, hi) = block_interval(n);
        parts.push(similarity(&cache[q], &lo, &hi)?);
    }
    Ok(union_all(parts.iter()))
}

/// `q_m = p(1 − 2^(−m−1))` for `m ≤ m_max`, with `p` the last prefix entry.
pub fn big_f_weights(p: &LowerRealPrefix, m_max: u64) -> Result<Vec<Q>> {
    let p = p.last().ok_or_else(|| SalemError::invalid("empty lower-real prefix"))?;
    Ok((0..=m_max).map(|m| p * (Q::one() - pow2(-(m as i64) - 1))).collect())
}

/// `{0} ∪ ⋃_{m≤m_max} τ_m f(q_m, Φ(x)_m)` at level `k`, each inner `f`
/// truncated at `n_max = m_max`.
pub fn big_f_level(p: &LowerRealPrefix, x: &BitMatrixPrefix, k: u64, m_max: u64, mode: &Mode) -> Result<IntervalUnion> {
    if (x.rows as u64) <= m_max {
        return Err(SalemError::invalid(format!("matrix needs more than {m_max} rows")));
    }
    if (x.cols as u64) < k {
        return Err(SalemError::invalid(format!("rows need at least {k} bits")));
    }
    let phi = phi_saturate(x);
    let weights = big_f_weights(p, m_max)?;
    let mut parts = vec![zero_point()];
    for (m, q) in weights.iter().enumerate() {
        let inner = LowerRealPrefix::constant(q.clone(), m_max as usize + 1)?;
        let block = f_level(&inner, phi.row(m), k, m_max, mode)?;
        let (lo, hi) = block_interval(m as u64);
        parts.push(similarity(&block, &lo, &hi)?);
    }
    Ok(union_all(parts.iter()))
}

/// Middle-thirds level `k`.
pub fn cantor_level(k: u64) -> Result<IntervalUnion> {
    if k > 20 {
        return Err(SalemError::infeasible("cantor level beyond k = 20"));
    }
    let w = Q::new(BigInt::one(), BigInt::from(3u32).pow(k as u32));
    let mut lefts = vec![BigInt::zero()];
    for _ in 0..k {
        lefts = lefts.iter().flat_map(|a| [a * 3, a * 3 + 2]).collect();
    }
    let pairs: Vec<(Q, Q)> = lefts
        .into_iter()
        .map(|a| {
            let lo = Q::from_integer(a) * &w;
            let hi = &lo + &w;
            (lo, hi)
        })
        .collect();
    IntervalUnion::from_rationals(&pairs)
}

/// `F(p,x) ∪ K` at level `k`.
pub fn h_level(x: &BitMatrixPrefix, p: &Q, k: u64, m_max: u64, mode: &Mode) -> Result<IntervalUnion> {
    let prefix = LowerRealPrefix::new(vec![p.clone()])?;
    let f = big_f_level(&prefix, x, k, m_max, mode)?;
    Ok(f.union(&cantor_level(k)?))
}

/// `{x ∈ [0,1]^d : |x| ∈ A}`, optionally with the unit sphere added.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSet {
    pub profile: IntervalUnion,
    pub ambient_dim: u64,
    pub include_unit_sphere: bool,
    /// The profile has a point other than 0.
    pub hypothesis_ok: bool,
}

pub fn radial_lift(profile: IntervalUnion, d: u64, with_sphere: bool) -> Result<RadialSet> {
    if d == 0 {
        return Err(SalemError::invalid("ambient dimension must be >= 1"));
    }
    if !profile.within_unit() {
        return Err(SalemError::invalid("profile must lie in [0,1]"));
    }
    let hypothesis_ok = profile.iter().any(|iv| iv.hi > EValue::zero());
    Ok(RadialSet { profile, ambient_dim: d, include_unit_sphere: with_sphere, hypothesis_ok })
}

impl RadialSet {
    /// `d − 1 + dim(profile)`.
    pub fn target_dim(&self, profile_dim: &Q) -> Q {
        Q::from_integer(BigInt::from(self.ambient_dim - 1)) + profile_dim
    }

    pub fn contains_radius(&self, r: &Q) -> bool {
        (self.include_unit_sphere && r.is_one()) || self.profile.contains_q(r)
    }

    /// Radii actually present, the sphere included.
    pub fn effective_profile(&self) -> IntervalUnion {
        if self.include_unit_sphere {
            self.profile.union(&IntervalUnion::point(EValue::one()))
        } else {
            self.profile.clone()
        }
    }
}
