//! Christ dyadic cubes built from nested nets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nets::NetHierarchy;
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: usize,
    /// Ascending point ids.
    pub members: Vec<usize>,
    /// Index of the parent within the previous level.
    pub parent: Option<usize>,
    /// Indices of the children within the next level.
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeLevel {
    pub k: i32,
    pub cubes: Vec<Cube>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicCubeTree {
    pub delta: f64,
    /// Coarsest first.
    pub levels: Vec<CubeLevel>,
    /// Largest `a0` with `B(z, a0 delta^k)` inside every cube.
    pub a0: f64,
    /// Smallest `C1` with `diam(Q) <= C1 delta^k` for every cube.
    #[serde(rename = "C1")]
    pub c1: f64,
}

/// Relative shrink applied to the measured `a0` so the closed balls it
/// defines sit strictly inside the cubes.
const A0_SHRINK: f64 = 1.0 - 1e-9;

impl DyadicCubeTree {
    pub fn k_min(&self) -> i32 {
        self.levels[0].k
    }

    pub fn k_max(&self) -> i32 {
        self.levels.last().unwrap().k
    }

    pub fn level(&self, k: i32) -> Option<&CubeLevel> {
        let j = k - self.k_min();
        if j < 0 {
            return None;
        }
        self.levels.get(j as usize)
    }

    pub fn radius(&self, k: i32) -> f64 {
        self.delta.powi(k)
    }

    /// `owner[x]` = index of the level-`k` cube containing `x`, read from
    /// the member lists.
    pub fn owners(&self, k: i32, n: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n];
        if let Some(level) = self.level(k) {
            for (i, q) in level.cubes.iter().enumerate() {
                for &x in &q.members {
                    owner[x] = i;
                }
            }
        }
        owner
    }
}

fn nearest_of(space: &FiniteMetricMeasureSpace, x: usize, candidates: &[usize]) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, &c) in candidates.iter().enumerate() {
        let d = space.dist(x, c);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Assigns each point at level `k` to the nearest level-`k` center among
/// the children of its level-`(k-1)` cube (ties to the smaller id), so the
/// levels are nested by construction.
pub fn build_cubes(
    space: &FiniteMetricMeasureSpace,
    nets: &NetHierarchy,
) -> Result<DyadicCubeTree> {
    let audit = nets.audit(space);
    if let Some((k, c)) = audit.nesting_failures.first() {
        return input(format!(
            "nets are not nested: center {c} of level {k} missing below"
        ));
    }
    if nets.levels.is_empty() {
        return input("no net levels");
    }
    let n = space.len();
    let mut levels: Vec<CubeLevel> = Vec::with_capacity(nets.levels.len());
    for (j, centers) in nets.levels.iter().enumerate() {
        let k = nets.k_min + j as i32;
        let mut cubes: Vec<Cube> = centers
            .iter()
            .map(|&c| Cube {
                center: c,
                members: vec![],
                parent: None,
                children: vec![],
            })
            .collect();
        match levels.last_mut() {
            None => {
                for x in 0..n {
                    let i = nearest_of(space, x, centers);
                    cubes[i].members.push(x);
                }
            }
            Some(prev) => {
                let owner = {
                    let mut o = vec![usize::MAX; n];
                    for (i, q) in prev.cubes.iter().enumerate() {
                        for &x in &q.members {
                            o[x] = i;
                        }
                    }
                    o
                };
                // child centers grouped by parent cube, ascending ids
                let mut kids: Vec<Vec<usize>> = vec![vec![]; prev.cubes.len()];
                for (i, &c) in centers.iter().enumerate() {
                    kids[owner[c]].push(i);
                    cubes[i].parent = Some(owner[c]);
                }
                for (p, ks) in kids.iter().enumerate() {
                    prev.cubes[p].children = ks.clone();
                }
                let assignment: Vec<usize> = (0..n)
                    .into_par_iter()
                    .map(|x| {
                        let ks = &kids[owner[x]];
                        let cand: Vec<usize> = ks.iter().map(|&i| centers[i]).collect();
                        ks[nearest_of(space, x, &cand)]
                    })
                    .collect();
                for (x, i) in assignment.into_iter().enumerate() {
                    cubes[i].members.push(x);
                }
            }
        }
        levels.push(CubeLevel { k, cubes });
    }
    let (a0, c1) = measure_constants(space, nets.delta, &levels);
    Ok(DyadicCubeTree {
        delta: nets.delta,
        levels,
        a0,
        c1,
    })
}

/// `a0` and `C1` realized by the given levels.
pub fn measure_constants(
    space: &FiniteMetricMeasureSpace,
    delta: f64,
    levels: &[CubeLevel],
) -> (f64, f64) {
    let n = space.len();
    let mut a0 = f64::INFINITY;
    let mut loose = 0.0f64;
    let mut c1 = 0.0f64;
    for level in levels {
        let r = delta.powi(level.k);
        let mut owner = vec![usize::MAX; n];
        for (i, q) in level.cubes.iter().enumerate() {
            for &x in &q.members {
                owner[x] = i;
            }
        }
        let per_cube: Vec<(f64, f64, f64)> = level
            .cubes
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                let mut gap = f64::INFINITY;
                let mut ecc = 0.0f64;
                for (y, &o) in owner.iter().enumerate() {
                    let d = space.dist(q.center, y);
                    if o == i {
                        ecc = ecc.max(d);
                    } else {
                        gap = gap.min(d);
                    }
                }
                let mut diam = 0.0f64;
                for (i, &x) in q.members.iter().enumerate() {
                    for &y in &q.members[..i] {
                        diam = diam.max(space.dist(x, y));
                    }
                }
                (gap / r, ecc / r, diam / r)
            })
            .collect();
        for (gap, ecc, diam) in per_cube {
            a0 = a0.min(gap);
            loose = loose.max(ecc);
            c1 = c1.max(diam);
        }
    }
    let a0 = if a0.is_finite() {
        a0 * A0_SHRINK
    } else {
        loose.max(f64::MIN_POSITIVE)
    };
    (a0, c1)
}
