//! Cover certification for Hausdorff balls in `K([0,1])`, and dyadic
//! measure tree codes.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebraic_endpoints::EValue;
use crate::error::{Result, SalemError};
use crate::interval_sets::{hausdorff_distance, IntervalUnion};
use crate::rat::{serde_q, Q};

/// `{K : d_H(K, center) < radius}`; an empty center stands for `∅`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HausdorffBall {
    #[serde(with = "crate::rat::serde_q_vec")]
    pub center: Vec<Q>,
    #[serde(with = "serde_q")]
    pub radius: Q,
}

impl HausdorffBall {
    pub fn new(mut center: Vec<Q>, radius: Q) -> Result<HausdorffBall> {
        if radius <= Q::zero() {
            return Err(SalemError::invalid("ball radius must be positive"));
        }
        if center.iter().any(|c| *c < Q::zero() || *c > Q::one()) {
            return Err(SalemError::invalid("centers must lie in [0,1]"));
        }
        center.sort();
        center.dedup();
        Ok(HausdorffBall { center, radius })
    }

    pub fn validate(&self) -> Result<()> {
        HausdorffBall::new(self.center.clone(), self.radius.clone()).and_then(|b| {
            if b.center == self.center {
                Ok(())
            } else {
                Err(SalemError::invalid("center entries must be sorted and distinct"))
            }
        })
    }

    /// Euclidean radius `R = q/(1−q)` of the point balls, `None` when `q ≥ 1`.
    pub fn point_radius(&self) -> Option<Q> {
        if self.radius >= Q::one() {
            None
        } else {
            Some(&self.radius / (Q::one() - &self.radius))
        }
    }
}

/// Finite union of closed rational intervals, sorted and disjoint.
pub type ClosedSet = Vec<(Q, Q)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum CoverVerdict {
    Covers,
    /// `witness` is the escaping compact set; `None` means `∅`.
    NotCovers {
        #[serde(with = "closed_set_opt")]
        witness: Option<ClosedSet>,
    },
}

mod closed_set_opt {
    use super::ClosedSet;
    use crate::rat::{fmt_q, parse_q};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<ClosedSet>, s: S) -> Result<S::Ok, S::Error> {
        let v: Option<Vec<[String; 2]>> = x.as_ref().map(|c| c.iter().map(|(a, b)| [fmt_q(a), fmt_q(b)]).collect());
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ClosedSet>, D::Error> {
        let v: Option<Vec<[String; 2]>> = Option::deserialize(d)?;
        v.map(|c| {
            c.iter()
                .map(|[a, b]| Ok((parse_q(a).map_err(serde::de::Error::custom)?, parse_q(b).map_err(serde::de::Error::custom)?)))
                .collect()
        })
        .transpose()
    }
}

fn unit_set() -> ClosedSet {
    vec![(Q::zero(), Q::one())]
}

/// `Y \ (c − R, c + R)`.
fn remove_open(y: &ClosedSet, c: &Q, r: &Option<Q>) -> ClosedSet {
    let Some(r) = r else { return vec![] };
    let (a, b) = (c - r, c + r);
    let mut out = Vec::new();
    for (l, h) in y {
        if *h <= a || *l >= b {
            out.push((l.clone(), h.clone()));
            continue;
        }
        if *l <= a {
            out.push((l.clone(), a.clone()));
        }
        if b <= *h {
            out.push((b.clone(), h.clone()));
        }
    }
    out
}

fn remove_ball(y: &ClosedSet, ball: &HausdorffBall) -> ClosedSet {
    let r = ball.point_radius();
    ball.center.iter().fold(y.clone(), |acc, c| remove_open(&acc, c, &r))
}

/// Exact cover test by the labelled tree search over strings of
/// `(ball index, center point)` pairs.
pub fn cover_check(balls: &[HausdorffBall]) -> Result<CoverVerdict> {
    for b in balls {
        b.validate()?;
    }
    if balls.iter().any(|b| b.radius > Q::one()) {
        return Ok(CoverVerdict::Covers);
    }
    if !balls.iter().any(|b| b.center.is_empty()) {
        return Ok(CoverVerdict::NotCovers { witness: None });
    }
    let live: Vec<&HausdorffBall> = balls.iter().filter(|b| !b.center.is_empty()).collect();
    let mut seen: HashSet<(Vec<bool>, ClosedSet)> = HashSet::new();
    let mut stack = vec![(vec![false; live.len()], unit_set())];
    while let Some((used, y)) = stack.pop() {
        if y.is_empty() || !seen.insert((used.clone(), y.clone())) {
            continue;
        }
        let mut leaf = true;
        for (a, ball) in live.iter().enumerate() {
            if used[a] || !remove_ball(&y, ball).is_empty() {
                continue;
            }
            leaf = false;
            let r = ball.point_radius();
            for c in &ball.center {
                let mut u = used.clone();
                u[a] = true;
                stack.push((u, remove_open(&y, c, &r)));
            }
        }
        if leaf {
            return Ok(CoverVerdict::NotCovers { witness: Some(y) });
        }
    }
    Ok(CoverVerdict::Covers)
}

pub fn closed_set_union(y: &ClosedSet) -> Result<IntervalUnion> {
    IntervalUnion::from_rationals(y)
}

/// Re-check that a witness lies outside every ball, using certified lower
/// bounds on the Hausdorff distance.
pub fn witness_escapes(balls: &[HausdorffBall], witness: &Option<ClosedSet>) -> Result<bool> {
    let k = match witness {
        None => IntervalUnion::empty(),
        Some(y) => closed_set_union(y)?,
    };
    for b in balls {
        let center = IntervalUnion::from_sorted_unchecked(
            b.center.iter().map(|c| crate::interval_sets::Interval::point(EValue::rational(c.clone()))).collect(),
        );
        let d = hausdorff_distance(&k, &center, 40);
        if d.lo < b.radius {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Masses `π(σ)` on binary strings of length at most `depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureTreeCode {
    pub depth: u32,
    #[serde(with = "q_map")]
    pub pi: BTreeMap<String, Q>,
}

mod q_map {
    use std::collections::BTreeMap;

    use crate::rat::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, Q>, s: S) -> Result<S::Ok, S::Error> {
        let v: BTreeMap<&String, String> = m.iter().map(|(k, q)| (k, fmt_q(q))).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Q>, D::Error> {
        let v: BTreeMap<String, String> = BTreeMap::deserialize(d)?;
        v.into_iter().map(|(k, s)| Ok((k, parse_q(&s).map_err(serde::de::Error::custom)?))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCodeCheck {
    pub valid: bool,
    /// The string where the first violation was found.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub site: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

fn strings_of_len(n: u32) -> impl Iterator<Item = String> {
    (0..1u64 << n).map(move |i| (0..n).map(|j| if (i >> (n - 1 - j)) & 1 == 1 { '1' } else { '0' }).collect())
}

impl MeasureTreeCode {
    /// The coin-flip measure `π(σ) = 2^(−|σ|)`.
    pub fn uniform(depth: u32) -> MeasureTreeCode {
        let mut pi = BTreeMap::new();
        for n in 0..=depth {
            let m = Q::new(BigInt::one(), BigInt::one() << n as usize);
            for s in strings_of_len(n) {
                pi.insert(s, m.clone());
            }
        }
        MeasureTreeCode { depth, pi }
    }

    /// Random code: each node splits its mass at a random multiple of `1/16`.
    pub fn stick_breaking(depth: u32, seed: u64) -> MeasureTreeCode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pi = BTreeMap::new();
        pi.insert(String::new(), Q::one());
        for n in 0..depth {
            for s in strings_of_len(n) {
                let m = pi[&s].clone();
                let u = Q::new(BigInt::from(rng.gen_range(0..=16u32)), BigInt::from(16));
                let left = &m * &u;
                pi.insert(format!("{s}1"), &m - &left);
                pi.insert(format!("{s}0"), left);
            }
        }
        MeasureTreeCode { depth, pi }
    }
}

pub fn validate_tree_code(code: &MeasureTreeCode) -> TreeCodeCheck {
    let fail = |site: &str, reason: &str| TreeCodeCheck { valid: false, site: Some(site.to_string()), reason: Some(reason.to_string()) };
    for (s, m) in &code.pi {
        if s.len() > code.depth as usize || s.chars().any(|c| c != '0' && c != '1') {
            return fail(s, "not a binary string within depth");
        }
        if *m < Q::zero() {
            return fail(s, "negative mass");
        }
    }
    match code.pi.get("") {
        Some(m) if m.is_one() => {}
        _ => return fail("", "root mass must be 1"),
    }
    for n in 0..code.depth {
        for s in strings_of_len(n) {
            let get = |t: &str| code.pi.get(t).cloned();
            match (get(&s), get(&format!("{s}0")), get(&format!("{s}1"))) {
                (Some(m), Some(a), Some(b)) => {
                    if m != a + b {
                        return fail(&s, "children do not sum to parent");
                    }
                }
                _ => return fail(&s, "missing mass"),
            }
        }
    }
    TreeCodeCheck { valid: true, site: None, reason: None }
}

/// Mass of `[0.σ, 0.σ + 2^(−|σ|)]` under the binary-expansion push-forward.
pub fn pushforward_dyadic_mass(code: &MeasureTreeCode, sigma: &str) -> Result<Q> {
    if sigma.len() > code.depth as usize {
        return Err(SalemError::invalid(format!("|σ| = {} exceeds depth {}", sigma.len(), code.depth)));
    }
    code.pi.get(sigma).cloned().ok_or_else(|| SalemError::invalid(format!("no mass recorded for {sigma:?}")))
}

/// `Σ_{|σ| = n} π(σ)`.
pub fn level_sum(code: &MeasureTreeCode, n: u32) -> Result<Q> {
    strings_of_len(n).map(|s| pushforward_dyadic_mass(code, &s)).sum()
}
