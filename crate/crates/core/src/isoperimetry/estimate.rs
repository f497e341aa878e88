//! The complementary isoperimetric constant on a finite test family.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::TestSet;
use super::layers::{connectivity_scale, distance_to_complement, Ball};
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    /// `inf` over the family and `kappa in [s, t]` of `mu(A_kappa) / (kappa mu(A))`.
    pub c_t: f64,
    pub worst_set: String,
    /// Where the inf is attained; a jump of the layer mass is approached
    /// from below.
    pub worst_kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetryReport {
    pub b0: Ball,
    /// Connectivity scale `s`, the smallest layer width considered.
    pub resolution: f64,
    pub curve: Vec<CurvePoint>,
    /// `C_t` at the smallest tested `t`, the sup of the curve.
    pub i_hat: f64,
    /// Largest tested `t` with `C_t > 0`, if any.
    pub kappa0: Option<f64>,
    pub sets: usize,
    /// Sets whose layer is empty for some tested `kappa`.
    pub positivity_violations: Vec<String>,
}

/// Distances to the complement, ascending, with prefix masses.
struct LayerProfile {
    dist: Vec<f64>,
    prefix: Vec<f64>,
    total: f64,
}

impl LayerProfile {
    fn new(space: &FiniteMetricMeasureSpace, set: &TestSet) -> Result<Self> {
        let d = distance_to_complement(space, &set.members)?;
        let mut pairs: Vec<(f64, f64)> = d
            .into_iter()
            .zip(set.members.iter().map(|&x| space.mass(x)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(pairs.len() + 1);
        prefix.push(0.0);
        for (_, m) in &pairs {
            prefix.push(prefix.last().unwrap() + m);
        }
        Ok(LayerProfile {
            dist: pairs.iter().map(|p| p.0).collect(),
            total: *prefix.last().unwrap(),
            prefix,
        })
    }

    /// Exact `inf` of the ratio over `kappa in [lo, hi]`: the layer mass is a
    /// right-continuous step function, so between jumps the ratio decreases
    /// and the inf is a left limit at a jump or the value at `hi`.
    fn inf_over(&self, lo: f64, hi: f64) -> (f64, f64) {
        let closed = |k: f64| self.prefix[self.dist.partition_point(|&d| d <= k)];
        let mut best = (closed(lo) / (lo * self.total), lo);
        let end = closed(hi) / (hi * self.total);
        if end < best.0 {
            best = (end, hi);
        }
        let first = self.dist.partition_point(|&d| d <= lo);
        let last = self.dist.partition_point(|&d| d <= hi);
        for j in first..last {
            let k = self.dist[j];
            if j > first && self.dist[j - 1] == k {
                continue;
            }
            let v = self.prefix[j] / (k * self.total);
            if v < best.0 {
                best = (v, k);
            }
        }
        best
    }
}

/// `C_t` for each `t` of the (positive) `kappa_grid`, with the inf over the
/// whole range `kappa in [s, t]` computed exactly; `s` is the
/// [`connectivity_scale`], below which a layer may be empty for discrete
/// reasons alone. A grid value `t < s` contributes only `kappa = t`.
///
/// The family is finite, so the curve is an upper bound for the constant
/// over all sets.
pub fn estimate_isoperimetric(
    space: &FiniteMetricMeasureSpace,
    b0: &Ball,
    family: &[TestSet],
    kappa_grid: &[f64],
) -> Result<IsoperimetryReport> {
    if family.is_empty() {
        return input("empty test family");
    }
    if kappa_grid.is_empty() || kappa_grid.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
        return input("kappa grid must be nonempty, positive and finite");
    }
    let mut grid = kappa_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    for set in family {
        if let Some(&x) = set.members.iter().find(|&&x| b0.contains(space, x)) {
            return input(format!(
                "test set {} meets the closed ball B0 at point {x}",
                set.name
            ));
        }
    }
    let s = connectivity_scale(space);
    let segments: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let lo = if t < s {
                t
            } else if j > 0 {
                grid[j - 1].max(s)
            } else {
                s
            };
            (lo, t)
        })
        .collect();
    // per set and segment: (inf ratio, kappa attaining it)
    let infs: Vec<Vec<(f64, f64)>> = family
        .par_iter()
        .map(|set| {
            let prof = LayerProfile::new(space, set)?;
            Ok(segments
                .iter()
                .map(|&(lo, hi)| prof.inf_over(lo, hi))
                .collect())
        })
        .collect::<Result<_>>()?;
    let positivity_violations = family
        .iter()
        .zip(&infs)
        .filter(|(_, r)| r.iter().any(|v| v.0 == 0.0))
        .map(|(set, _)| set.name.clone())
        .collect();
    let mut curve = Vec::with_capacity(grid.len());
    let mut running = (f64::INFINITY, String::new(), f64::NAN);
    for (j, &t) in grid.iter().enumerate() {
        for (set, r) in family.iter().zip(&infs) {
            if r[j].0 < running.0 {
                running = (r[j].0, set.name.clone(), r[j].1);
            }
        }
        curve.push(CurvePoint {
            t,
            c_t: running.0,
            worst_set: running.1.clone(),
            worst_kappa: running.2,
        });
    }
    let i_hat = curve[0].c_t;
    let kappa0 = curve.iter().rev().find(|p| p.c_t > 0.0).map(|p| p.t);
    Ok(IsoperimetryReport {
        b0: *b0,
        resolution: s,
        curve,
        i_hat,
        kappa0,
        sets: family.len(),
        positivity_violations,
    })
}
