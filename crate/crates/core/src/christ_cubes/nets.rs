//! Nested maximal `delta^k`-separated nets.

use serde::{Deserialize, Serialize};

use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetHierarchy {
    pub delta: f64,
    /// Coarsest level.
    pub k_min: i32,
    /// `levels[j]` holds the centers of level `k_min + j`, ascending ids.
    pub levels: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetAudit {
    /// Pairs at distance `< delta^k` within a level: `(k, a, b)`.
    pub separation_failures: Vec<(i32, usize, usize)>,
    /// Points farther than `delta^k` from every level-`k` center.
    pub maximality_failures: Vec<(i32, usize)>,
    /// Centers of level `k` missing from level `k + 1`.
    pub nesting_failures: Vec<(i32, usize)>,
}

impl NetAudit {
    pub fn passed(&self) -> bool {
        self.separation_failures.is_empty()
            && self.maximality_failures.is_empty()
            && self.nesting_failures.is_empty()
    }
}

impl NetHierarchy {
    pub fn k_max(&self) -> i32 {
        self.k_min + self.levels.len() as i32 - 1
    }

    pub fn radius(&self, k: i32) -> f64 {
        self.delta.powi(k)
    }

    pub fn level(&self, k: i32) -> Option<&[usize]> {
        let j = k - self.k_min;
        if j < 0 {
            return None;
        }
        self.levels.get(j as usize).map(|v| v.as_slice())
    }

    /// Nearest level-`k` center to `x`, ties to the smaller id.
    pub fn nearest_center(
        &self,
        space: &FiniteMetricMeasureSpace,
        k: i32,
        x: usize,
    ) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for &c in self.level(k)? {
            let d = space.dist(x, c);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, c));
            }
        }
        best.map(|b| b.1)
    }

    pub fn audit(&self, space: &FiniteMetricMeasureSpace) -> NetAudit {
        let mut audit = NetAudit {
            separation_failures: vec![],
            maximality_failures: vec![],
            nesting_failures: vec![],
        };
        for (j, centers) in self.levels.iter().enumerate() {
            let k = self.k_min + j as i32;
            let r = self.radius(k);
            for (i, &a) in centers.iter().enumerate() {
                for &b in &centers[..i] {
                    if space.dist(a, b) < r {
                        audit.separation_failures.push((k, b, a));
                    }
                }
            }
            for x in 0..space.len() {
                if !centers.iter().any(|&c| space.dist(x, c) <= r) {
                    audit.maximality_failures.push((k, x));
                }
            }
            if let Some(finer) = self.levels.get(j + 1) {
                for c in centers {
                    if finer.binary_search(c).is_err() {
                        audit.nesting_failures.push((k, *c));
                    }
                }
            }
        }
        audit
    }
}

/// Level range from the first scale exceeding the diameter (one center)
/// down to the first scale at or below the minimal separation (every point
/// a center).
pub fn auto_levels(space: &FiniteMetricMeasureSpace, delta: f64) -> Result<(i32, i32)> {
    check_delta(delta)?;
    let diam = space.diameter();
    let sep = space.min_separation();
    if space.len() == 1 {
        return Ok((0, 0));
    }
    // largest k with delta^k > diam
    let mut k_min = 0i32;
    while delta.powi(k_min) <= diam {
        k_min -= 1;
    }
    while delta.powi(k_min + 1) > diam {
        k_min += 1;
    }
    let mut k_max = k_min;
    while sep.is_finite() && delta.powi(k_max) > sep {
        k_max += 1;
    }
    Ok((k_min, k_max))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return input(format!("delta = {delta} must lie in (0, 1)"));
    }
    Ok(())
}

/// Greedy nets, coarse to fine. Each level starts from the centers of the
/// level above, then scans points by ascending id and keeps every point at
/// distance `>= delta^k` from all centers chosen so far.
pub fn build_nets(
    space: &FiniteMetricMeasureSpace,
    delta: f64,
    levels: Option<(i32, i32)>,
) -> Result<NetHierarchy> {
    check_delta(delta)?;
    let (k_min, k_max) = match levels {
        Some(r) => r,
        None => auto_levels(space, delta)?,
    };
    if k_max < k_min {
        return input("empty level range");
    }
    let n = space.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for k in k_min..=k_max {
        let r = delta.powi(k);
        let mut centers: Vec<usize> = out.last().cloned().unwrap_or_default();
        let mut is_center = vec![false; n];
        for &c in &centers {
            is_center[c] = true;
        }
        for (x, &taken) in is_center.iter().enumerate() {
            if !taken && centers.iter().all(|&c| space.dist(x, c) >= r) {
                centers.push(x);
            }
        }
        centers.sort_unstable();
        out.push(centers);
    }
    Ok(NetHierarchy {
        delta,
        k_min,
        levels: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tenths() -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::euclidean(
            (0..=10).map(|i| vec![i as f64 / 10.0]).collect(),
            vec![0.1; 11],
        )
        .unwrap()
    }

    /// All maximal separated subsets by brute force over bitmasks.
    fn is_maximal_separated(s: &FiniteMetricMeasureSpace, set: &[usize], r: f64) -> bool {
        let sep = set
            .iter()
            .all(|&a| set.iter().all(|&b| a == b || s.dist(a, b) >= r));
        let maximal = (0..s.len())
            .filter(|x| !set.contains(x))
            .all(|x| set.iter().any(|&c| s.dist(x, c) < r));
        sep && maximal
    }

    #[test]
    fn greedy_single_level_on_tenths() {
        let s = tenths();
        let nets = build_nets(&s, 0.5, Some((2, 2))).unwrap();
        assert_eq!(nets.levels[0], vec![0, 3, 6, 9]);
        assert!(is_maximal_separated(&s, &nets.levels[0], 0.25));
    }

    #[test]
    fn auto_levels_reach_both_ends() {
        let s = tenths();
        let nets = build_nets(&s, 0.5, None).unwrap();
        assert_eq!(nets.levels[0].len(), 1);
        assert!(nets.radius(nets.k_min) > s.diameter());
        assert_eq!(nets.levels.last().unwrap().len(), s.len());
        assert!(nets.audit(&s).passed());
        for (j, lv) in nets.levels.iter().enumerate() {
            assert!(is_maximal_separated(
                &s,
                lv,
                nets.radius(nets.k_min + j as i32)
            ));
        }
    }

    #[test]
    fn bad_delta() {
        assert!(build_nets(&tenths(), 1.0, None).is_err());
        assert!(build_nets(&tenths(), 0.0, None).is_err());
    }
}
