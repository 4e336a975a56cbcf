//! Levels of the closed set `T(α)`: the Kaufman levels with the left
//! endpoints of every removed interval kept as points.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::interval_sets::{normalize, Interval, IntervalUnion};
use crate::kaufman_engine::levels::s_levels;
use crate::kaufman_engine::schedule::{alpha_parts, Mode};
use crate::rat::{serde_q, Q};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TLevel {
    #[serde(with = "serde_q")]
    pub alpha: Q,
    pub k: u64,
    pub level: IntervalUnion,
    /// Index of the level `k−1` interval containing each level `k` interval.
    pub parent_map: Vec<usize>,
    /// Level `k` indices that are retained left endpoints.
    pub kept_points: Vec<usize>,
}

/// One recursion step: `(T ∩ S) ∪ {a_i : J_i ∩ S = ∅}`.
pub fn t_step(prev: &IntervalUnion, s_next: &IntervalUnion) -> Result<(IntervalUnion, Vec<usize>, Vec<usize>)> {
    let tilde = prev.intersect(s_next);
    let mut hit = vec![false; prev.len()];
    for iv in tilde.iter() {
        if let Some(i) = prev.locate(&iv.lo) {
            hit[i] = true;
        }
    }
    let points: Vec<Interval> = prev
        .iter()
        .zip(&hit)
        .filter(|(_, h)| !**h)
        .map(|(iv, _)| Interval::point(iv.lo.clone()))
        .collect();
    let kept: std::collections::HashSet<Interval> = points.iter().cloned().collect();
    let mut raw = tilde.intervals;
    raw.extend(points);
    let level = normalize(raw)?;
    let mut parent_map = Vec::with_capacity(level.len());
    let mut kept_points = Vec::new();
    for (j, iv) in level.iter().enumerate() {
        parent_map.push(prev.locate(&iv.lo).expect("levels are nested"));
        if kept.contains(iv) {
            kept_points.push(j);
        }
    }
    Ok((level, parent_map, kept_points))
}

/// `T^(0)(α), …, T^(k)(α)`.
pub fn t_levels(alpha: &Q, k: u64, mode: &Mode) -> Result<Vec<TLevel>> {
    alpha_parts(alpha)?;
    let s = if k == 0 { vec![IntervalUnion::unit()] } else { s_levels(alpha, k, mode)? };
    let mut out = vec![TLevel {
        alpha: alpha.clone(),
        k: 0,
        level: s[0].clone(),
        parent_map: vec![],
        kept_points: vec![],
    }];
    for j in 1..=k as usize {
        let (level, parent_map, kept_points) = t_step(&out[j - 1].level, &s[j])?;
        out.push(TLevel { alpha: alpha.clone(), k: j as u64, level, parent_map, kept_points });
    }
    Ok(out)
}

pub fn t_level(alpha: &Q, k: u64, mode: &Mode) -> Result<TLevel> {
    Ok(t_levels(alpha, k, mode)?.pop().expect("level 0 is always present"))
}

impl TLevel {
    /// Nesting in `prev` and parent coverage of `prev`.
    pub fn check_against(&self, prev: &TLevel) -> (bool, bool) {
        let nested = self.level.is_subset_of(&prev.level);
        let mut covered = vec![false; prev.level.len()];
        for (iv, &p) in self.level.iter().zip(&self.parent_map) {
            if p < covered.len() && prev.level.intervals[p].contains_interval(iv) {
                covered[p] = true;
            }
        }
        (nested, covered.iter().all(|&c| c))
    }
}
