//! The noncentred dyadic maximal function over cubes of resolution `>= 2`.

use serde::{Deserialize, Serialize};

use super::bmo::check_values;
use crate::christ_cubes::DyadicCubeTree;
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

/// Tree level of resolution 2: the coarsest level is resolution 0.
pub fn resolution_two_level(tree: &DyadicCubeTree) -> i32 {
    (tree.k_min() + 2).min(tree.k_max())
}

/// `M_2 f(x)`, the largest average of `|f|` over cubes of level
/// `>= min_level` containing `x`.
pub fn dyadic_maximal(
    space: &FiniteMetricMeasureSpace,
    tree: &DyadicCubeTree,
    f: &[f64],
    min_level: i32,
) -> Result<Vec<f64>> {
    check_values(space, f)?;
    if min_level > tree.k_max() {
        return input(format!("no cube level at or above {min_level}"));
    }
    let m = space.masses();
    let mut out = vec![0.0f64; space.len()];
    for level in tree.levels.iter().filter(|l| l.k >= min_level) {
        for q in &level.cubes {
            let w: f64 = q.members.iter().map(|&x| m[x]).sum();
            let avg = q.members.iter().map(|&x| m[x] * f[x].abs()).sum::<f64>() / w;
            for &x in &q.members {
                out[x] = out[x].max(avg);
            }
        }
    }
    Ok(out)
}

/// `sup_alpha alpha mu({Mf > alpha}) / ||f||_1`, read off the distinct
/// values `v` of `Mf` as the limit `v mu({Mf >= v})` from below.
pub fn weak_type_ratio(space: &FiniteMetricMeasureSpace, maximal: &[f64], f: &[f64]) -> f64 {
    let l1 = space.lp_norm(f, 1.0);
    if l1 == 0.0 {
        return 0.0;
    }
    let mut pairs: Vec<(f64, f64)> = maximal
        .iter()
        .cloned()
        .zip(space.masses().iter().cloned())
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    let mut acc = 0.0;
    for (i, &(v, w)) in pairs.iter().enumerate() {
        acc += w;
        if pairs.get(i + 1).is_none_or(|n| n.0 < v) {
            best = best.max(v * acc);
        }
    }
    best / l1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeReport {
    pub min_level: i32,
    /// Largest ratio found, a lower bound for `||M_2||_{1;1,inf}`.
    pub constant: f64,
    pub functions: usize,
}

/// Measures the weak type (1,1) quasi norm of `M_2` on normalized point
/// masses at up to `point_samples` evenly strided points plus `suite`.
pub fn weak_type_constant(
    space: &FiniteMetricMeasureSpace,
    tree: &DyadicCubeTree,
    min_level: i32,
    point_samples: usize,
    suite: &[Vec<f64>],
) -> Result<WeakTypeReport> {
    let n = space.len();
    let stride = n.div_ceil(point_samples.max(1)).max(1);
    let mut constant = 0.0f64;
    let mut functions = 0;
    for x in (0..n).step_by(stride) {
        let mut f = vec![0.0; n];
        f[x] = 1.0 / space.mass(x);
        let mf = dyadic_maximal(space, tree, &f, min_level)?;
        constant = constant.max(weak_type_ratio(space, &mf, &f));
        functions += 1;
    }
    for f in suite {
        let mf = dyadic_maximal(space, tree, f, min_level)?;
        constant = constant.max(weak_type_ratio(space, &mf, f));
        functions += 1;
    }
    Ok(WeakTypeReport {
        min_level,
        constant,
        functions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::christ_cubes::{build_cubes, build_nets};

    fn setup() -> (FiniteMetricMeasureSpace, DyadicCubeTree) {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 40.0]).collect();
        let m = (0..40).map(|i| 0.01 + 0.0005 * i as f64).collect();
        let s = FiniteMetricMeasureSpace::euclidean(pts, m).unwrap();
        let t = build_cubes(&s, &build_nets(&s, 0.5, None).unwrap()).unwrap();
        (s, t)
    }

    #[test]
    fn constants_are_fixed_points() {
        let (s, t) = setup();
        let mf = dyadic_maximal(&s, &t, &[1.5; 40], resolution_two_level(&t)).unwrap();
        assert!(mf.iter().all(|&v| (v - 1.5).abs() < 1e-14));
    }

    #[test]
    fn point_mass_matches_ancestor_scan() {
        let (s, t) = setup();
        let lo = resolution_two_level(&t);
        let mut f = vec![0.0; 40];
        f[17] = 1.0;
        let mf = dyadic_maximal(&s, &t, &f, lo).unwrap();
        for x in 0..40 {
            let mut best = 0.0f64;
            for k in lo..=t.k_max() {
                let owner = t.owners(k, 40);
                if owner[x] == owner[17] {
                    let q = &t.level(k).unwrap().cubes[owner[x]];
                    best = best.max(s.mass(17) / s.set_mass(&q.members));
                }
            }
            assert_eq!(mf[x], best);
        }
        // finest admissible cube average is dominated
        let owner = t.owners(t.k_max(), 40);
        for x in 0..40 {
            let q = &t.level(t.k_max()).unwrap().cubes[owner[x]];
            let avg =
                q.members.iter().map(|&y| f[y] * s.mass(y)).sum::<f64>() / s.set_mass(&q.members);
            assert!(mf[x] >= avg);
        }
    }

    #[test]
    fn weak_type_of_dyadic_maximal_is_one() {
        let (s, t) = setup();
        let suite = vec![(0..40).map(|i| (i as f64).sin()).collect::<Vec<_>>()];
        let rep = weak_type_constant(&s, &t, resolution_two_level(&t), 40, &suite).unwrap();
        assert!((rep.constant - 1.0).abs() < 1e-12, "{}", rep.constant);
        assert_eq!(rep.functions, 41);
    }

    #[test]
    fn levels_beyond_the_tree_are_rejected() {
        let (s, t) = setup();
        assert!(dyadic_maximal(&s, &t, &[0.0; 40], t.k_max() + 1).is_err());
    }
}
