//! Disjoint dyadic cubes near the boundary of a set carrying a fixed
//! fraction of its mass.

use serde::{Deserialize, Serialize};

use super::layers::{distance_to_complement, mask, Ball};
use crate::christ_cubes::DyadicCubeTree;
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

/// `(1 - e^{-I kappa / 2}) / 4`.
pub fn covering_fraction(i: f64, kappa: f64) -> f64 {
    (1.0 - (-i * kappa / 2.0).exp()) / 4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedCube {
    pub k: i32,
    pub index: usize,
    pub mass: f64,
    /// `rho(Q, A^c)`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringSelection {
    pub cubes: Vec<SelectedCube>,
    pub mass_sum: f64,
    pub set_mass: f64,
    /// `(1 - e^{-I kappa/2}) mu(A) / 4`.
    pub bound: f64,
    pub pass: bool,
    /// Hypothesis `A ∩ B0 ⊆ A_kappa`.
    pub hypothesis_holds: bool,
    pub candidates: usize,
}

/// Every cube of level `>= nu` inside `A` within `kappa` of `A^c`, as
/// `(k, index, mass, gap, members)`.
pub fn candidate_cubes(
    space: &FiniteMetricMeasureSpace,
    tree: &DyadicCubeTree,
    set: &[usize],
    kappa: f64,
    nu: i32,
) -> Result<Vec<(i32, usize, f64, f64)>> {
    let inside = mask(space.len(), set);
    let d = distance_to_complement(space, set)?;
    let mut to_complement = vec![f64::INFINITY; space.len()];
    for (&x, &dx) in set.iter().zip(&d) {
        to_complement[x] = dx;
    }
    let mut out = vec![];
    for level in tree.levels.iter().filter(|l| l.k >= nu) {
        for (i, q) in level.cubes.iter().enumerate() {
            if !q.members.iter().all(|&x| inside[x]) {
                continue;
            }
            let gap = q
                .members
                .iter()
                .map(|&x| to_complement[x])
                .fold(f64::INFINITY, f64::min);
            if gap <= kappa {
                out.push((level.k, i, space.set_mass(&q.members), gap));
            }
        }
    }
    Ok(out)
}

/// Selects the maximal candidate cubes: levels `>= nu`, inside `A`, within
/// `kappa` of `A^c`. Dyadic cubes are nested or disjoint, so the maximal
/// candidates are pairwise disjoint and cover every candidate; their mass
/// is the largest any disjoint selection can reach.
pub fn covering_select(
    space: &FiniteMetricMeasureSpace,
    tree: &DyadicCubeTree,
    set: &[usize],
    kappa: f64,
    b0: &Ball,
    nu: i32,
    i_hat: f64,
) -> Result<CoveringSelection> {
    if set.is_empty() {
        return input("empty set");
    }
    let inside = mask(space.len(), set);
    let is_union = |k: i32| {
        tree.level(k).is_some_and(|l| {
            l.cubes.iter().all(|q| {
                q.members.iter().all(|&x| inside[x]) || q.members.iter().all(|&x| !inside[x])
            })
        })
    };
    if !(nu..=tree.k_max()).any(is_union) {
        return input(format!(
            "the set is not a union of cubes at any level >= {nu}"
        ));
    }
    let cands = candidate_cubes(space, tree, set, kappa, nu)?;
    let mut covered = vec![false; space.len()];
    let mut cubes = vec![];
    // coarse levels come first, so a candidate is maximal iff its center is
    // not yet covered by an accepted (coarser) candidate
    for (k, i, mass, gap) in &cands {
        let q = &tree.level(*k).unwrap().cubes[*i];
        if covered[q.center] {
            continue;
        }
        for &x in &q.members {
            covered[x] = true;
        }
        cubes.push(SelectedCube {
            k: *k,
            index: *i,
            mass: *mass,
            gap: *gap,
        });
    }
    let mass_sum: f64 = cubes.iter().map(|c| c.mass).sum();
    let set_mass = space.set_mass(set);
    let bound = covering_fraction(i_hat, kappa) * set_mass;
    let d = distance_to_complement(space, set)?;
    let hypothesis_holds = set
        .iter()
        .zip(&d)
        .all(|(&x, &dx)| !b0.contains(space, x) || dx <= kappa);
    Ok(CoveringSelection {
        pass: mass_sum >= bound,
        cubes,
        mass_sum,
        set_mass,
        bound,
        hypothesis_holds,
        candidates: cands.len(),
    })
}
