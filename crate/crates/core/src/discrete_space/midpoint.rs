//! The approximate midpoint property at finite resolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidpointReport {
    pub r0: f64,
    pub beta: f64,
    /// Slack added to both strict inequalities: the longest grid edge.
    pub relaxation: f64,
    /// `max_{rho(x,y) > R0} min_z max(rho(x,z), rho(y,z)) / rho(x,y)`.
    pub measured_beta: f64,
    /// Pair realizing `measured_beta`.
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_checked: usize,
    pub verdict: bool,
}

/// Checks that every pair farther apart than `R0` has a point `z` with
/// `rho(x,z), rho(y,z) < beta rho(x,y) + relaxation`.
pub fn verify_approximate_midpoint(
    space: &FiniteMetricMeasureSpace,
    r0: f64,
    beta: f64,
) -> Result<MidpointReport> {
    if !(beta > 0.5 && beta < 1.0) {
        return input("beta must lie in (1/2, 1)");
    }
    let relaxation = space.metadata.max_edge_length;
    let n = space.len();
    // per x: (worst ratio, y, pairs, all pass)
    let per_row: Vec<(f64, usize, usize, bool)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut worst = (0.0f64, usize::MAX, 0usize, true);
            for y in 0..x {
                let dxy = space.dist(x, y);
                if dxy <= r0 {
                    continue;
                }
                let mut best = f64::INFINITY;
                for z in 0..n {
                    best = best.min(space.dist(x, z).max(space.dist(y, z)));
                }
                worst.2 += 1;
                if best >= beta * dxy + relaxation {
                    worst.3 = false;
                }
                let ratio = best / dxy;
                if ratio > worst.0 {
                    worst.0 = ratio;
                    worst.1 = y;
                }
            }
            worst
        })
        .collect();
    let mut measured_beta = 0.0;
    let mut worst_pair = None;
    let mut pairs_checked = 0;
    let mut verdict = true;
    for (x, (ratio, y, count, ok)) in per_row.into_iter().enumerate() {
        pairs_checked += count;
        verdict &= ok;
        if count > 0 && ratio > measured_beta {
            measured_beta = ratio;
            worst_pair = Some((x, y));
        }
    }
    Ok(MidpointReport {
        r0,
        beta,
        relaxation,
        measured_beta,
        worst_pair,
        pairs_checked,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_space::{discretize, StoragePolicy};
    use crate::region::BoxRegion;
    use crate::weight_spaces::{Sign, WeightSpec};

    #[test]
    fn two_points_have_no_midpoint() {
        let s =
            FiniteMetricMeasureSpace::euclidean(vec![vec![0.0], vec![1.0]], vec![1.0; 2]).unwrap();
        let rep = verify_approximate_midpoint(&s, 0.5, 0.6).unwrap();
        assert!(!rep.verdict);
        assert_eq!(rep.measured_beta, 1.0);
        assert_eq!(rep.worst_pair, Some((1, 0)));
    }

    #[test]
    fn vacuous_beyond_diameter() {
        let s =
            FiniteMetricMeasureSpace::euclidean(vec![vec![0.0], vec![1.0]], vec![1.0; 2]).unwrap();
        let rep = verify_approximate_midpoint(&s, 1.0, 0.6).unwrap();
        assert!(rep.verdict && rep.pairs_checked == 0);
    }

    #[test]
    fn grid_is_a_length_space_up_to_resolution() {
        let bx = BoxRegion::centered(2, 1.0).unwrap();
        let s = discretize(
            &WeightSpec::power(2.0, 2).unwrap(),
            Sign::Minus,
            &bx,
            0.2,
            StoragePolicy::Dense,
        )
        .unwrap();
        let e = s.metadata.max_edge_length;
        for beta in [0.55, 0.75, 0.9] {
            let r0 = 4.0 * e / (2.0 * beta - 1.0);
            assert!(verify_approximate_midpoint(&s, r0, beta).unwrap().verdict);
        }
    }
}
