//! Boundary layers `A_kappa = {x in A : rho(x, A^c) <= kappa}` and the
//! reference ball `B0`.

use serde::{Deserialize, Serialize};

use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

/// Closed ball `{x : rho(center, x) <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, space: &FiniteMetricMeasureSpace, x: usize) -> bool {
        space.dist(self.center, x) <= self.radius
    }

    pub fn members(&self, space: &FiniteMetricMeasureSpace) -> Vec<usize> {
        space.ball(self.center, self.radius)
    }
}

/// Smallest closed ball centered at the heaviest point (ties to the smaller
/// id) holding more than half of the total mass.
pub fn default_b0(space: &FiniteMetricMeasureSpace) -> Ball {
    let masses = space.masses();
    let mut center = 0;
    for (i, &m) in masses.iter().enumerate() {
        if m > masses[center] {
            center = i;
        }
    }
    let mut order: Vec<(f64, f64)> = (0..space.len())
        .map(|y| (space.dist(center, y), masses[y]))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = 0.5 * space.total_mass();
    let mut acc = 0.0;
    let mut radius = order.last().unwrap().0;
    for (i, &(d, m)) in order.iter().enumerate() {
        acc += m;
        let last_at_distance = order.get(i + 1).is_none_or(|n| n.0 > d);
        if acc > half && last_at_distance {
            radius = d;
            break;
        }
    }
    Ball { center, radius }
}

/// Membership mask of `set`.
pub fn mask(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &x in set {
        m[x] = true;
    }
    m
}

/// `rho(x, A^c)` for each `x` in `set` (in the order of `set`).
pub fn distance_to_complement(space: &FiniteMetricMeasureSpace, set: &[usize]) -> Result<Vec<f64>> {
    let inside = mask(space.len(), set);
    let outside: Vec<usize> = (0..space.len()).filter(|&y| !inside[y]).collect();
    if outside.is_empty() {
        return input("the set is the whole space; its complement is empty");
    }
    if set.is_empty() {
        return input("the set is empty");
    }
    Ok(set
        .iter()
        .map(|&x| space.dist_to_set(x, &outside))
        .collect())
}

/// `(A_kappa, A^kappa)`: the points of `A` within `kappa` of the complement
/// and the rest.
pub fn boundary_layer(
    space: &FiniteMetricMeasureSpace,
    set: &[usize],
    kappa: f64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let d = distance_to_complement(space, set)?;
    let mut layer = vec![];
    let mut interior = vec![];
    for (&x, &dx) in set.iter().zip(&d) {
        if dx <= kappa {
            layer.push(x);
        } else {
            interior.push(x);
        }
    }
    Ok((layer, interior))
}

/// `mu(A_kappa)` from precomputed distances to the complement.
pub fn layer_mass(
    space: &FiniteMetricMeasureSpace,
    set: &[usize],
    to_complement: &[f64],
    kappa: f64,
) -> f64 {
    set.iter()
        .zip(to_complement)
        .filter(|(_, &d)| d <= kappa)
        .map(|(&x, _)| space.mass(x))
        .sum()
}

/// Longest edge of a minimum spanning tree: every nonempty proper subset has
/// a point within this distance of its complement, so below it a boundary
/// layer can be empty for purely discrete reasons.
pub fn connectivity_scale(space: &FiniteMetricMeasureSpace) -> f64 {
    let n = space.len();
    if n < 2 {
        return 0.0;
    }
    // Prim on the complete graph
    let mut reach = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut longest = 0.0f64;
    let mut next = 0;
    for _ in 0..n {
        let u = next;
        done[u] = true;
        if reach[u].is_finite() {
            longest = longest.max(reach[u]);
        }
        let row = space.row(u);
        let mut best = (f64::INFINITY, usize::MAX);
        for y in 0..n {
            if done[y] {
                continue;
            }
            reach[y] = reach[y].min(row[y]);
            if reach[y] < best.0 {
                best = (reach[y], y);
            }
        }
        if best.1 == usize::MAX {
            break;
        }
        next = best.1;
    }
    longest
}

/// `n` widths `2 s + step i` for the connectivity scale `s`. Starting at
/// `2 s` makes `C_t` at the first width an inf over at least one full jump
/// of every discrete layer mass.
pub fn resolved_kappa_grid(space: &FiniteMetricMeasureSpace, n: usize, step: f64) -> Vec<f64> {
    let s = connectivity_scale(space).max(f64::MIN_POSITIVE);
    (0..n).map(|i| 2.0 * s + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> FiniteMetricMeasureSpace {
        let h = 1.0 / (n - 1) as f64;
        FiniteMetricMeasureSpace::euclidean(
            (0..n).map(|i| vec![i as f64 * h]).collect(),
            vec![h; n],
        )
        .unwrap()
    }

    #[test]
    fn connectivity_scale_is_the_largest_gap() {
        let pts = [0.0, 0.1, 0.5, 0.6, 0.65];
        let s = FiniteMetricMeasureSpace::euclidean(
            pts.iter().map(|&x| vec![x]).collect(),
            vec![1.0; 5],
        )
        .unwrap();
        assert!((connectivity_scale(&s) - 0.4).abs() < 1e-12);
        let grid = resolved_kappa_grid(&s, 3, 0.1);
        assert!((grid[0] - 0.8).abs() < 1e-12 && (grid[2] - grid[0] - 0.2).abs() < 1e-12);
        // every proper subset has a nonempty layer at the first width
        for mask in 1u32..31 {
            let set: Vec<usize> = (0..5).filter(|&i| mask >> i & 1 == 1).collect();
            assert!(!boundary_layer(&s, &set, grid[0]).unwrap().0.is_empty());
        }
    }

    #[test]
    fn interval_layer_on_flat_line() {
        // points 0..=16 on [0, 2]; A = open (0.5, 1.5) = ids 5..=11 at spacing 1/8
        let s = FiniteMetricMeasureSpace::euclidean(
            (0..=16).map(|i| vec![i as f64 / 8.0]).collect(),
            vec![0.125; 17],
        )
        .unwrap();
        let a: Vec<usize> = (5..=11).collect();
        let (layer, interior) = boundary_layer(&s, &a, 0.25).unwrap();
        assert_eq!(layer, vec![5, 6, 10, 11]);
        assert_eq!(interior, vec![7, 8, 9]);
    }

    #[test]
    fn large_kappa_takes_everything() {
        let s = line(11);
        let a: Vec<usize> = (2..8).collect();
        let (layer, interior) = boundary_layer(&s, &a, 10.0).unwrap();
        assert_eq!(layer, a);
        assert!(interior.is_empty());
    }

    #[test]
    fn whole_space_is_rejected() {
        let s = line(4);
        assert!(boundary_layer(&s, &[0, 1, 2, 3], 0.1).is_err());
    }

    #[test]
    fn b0_holds_more_than_half() {
        let masses: Vec<f64> = (0..21)
            .map(|i| (-(i as f64 - 10.0).powi(2) / 20.0).exp())
            .collect();
        let pts = (0..21).map(|i| vec![i as f64]).collect();
        let s = FiniteMetricMeasureSpace::euclidean(pts, masses).unwrap();
        let b0 = default_b0(&s);
        assert_eq!(b0.center, 10);
        assert!(s.ball_mass(10, b0.radius) > 0.5 * s.total_mass());
        assert!(s.ball_mass(10, b0.radius - 1.0) <= 0.5 * s.total_mass());
    }
}
