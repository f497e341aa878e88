//! Gluing local representatives `l^B` into one function `f^l` through the
//! corrections `eta^B` carried along chains from a base center.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::christ_cubes::{chain_length_bound, NetHierarchy};
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Error, Result};

/// Relative spread allowed on overlaps and relative mean allowed on a ball.
pub const GLUE_TOLERANCE: f64 = 1e-9;

/// `l^B` on `B = B(center, b)`; `values` pairs with the ascending `members`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRepresentative {
    pub center: usize,
    pub members: Vec<usize>,
    pub values: Vec<f64>,
}

impl LocalRepresentative {
    /// `f - f_B` on `B(center, b)`.
    pub fn from_function(
        space: &FiniteMetricMeasureSpace,
        f: &[f64],
        center: usize,
        b: f64,
    ) -> Self {
        let members = space.ball(center, b);
        let w = space.set_mass(&members);
        let mean = members.iter().map(|&x| f[x] * space.mass(x)).sum::<f64>() / w;
        let values = members.iter().map(|&x| f[x] - mean).collect();
        LocalRepresentative {
            center,
            members,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCorrection {
    pub center: usize,
    /// `eta^{B_alpha}`.
    pub eta: f64,
    /// `rho(o, z_alpha)`.
    pub distance: f64,
    /// Points of the chain from `o`, both ends included.
    pub chain_points: usize,
    /// `2 (N - 1) sqrt(D) ||l||`, the bound the chain itself certifies.
    pub chain_bound: f64,
    /// `max(2, 8 (2d/b)^{1/[1 - log2(1 + beta)]}) sqrt(D) ||l||`.
    pub closed_bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueReport {
    pub base: usize,
    pub b: f64,
    pub beta: f64,
    /// `f^l`, defined on the union of the balls (every point).
    pub values: Vec<f64>,
    pub corrections: Vec<BallCorrection>,
    /// `max_B (mu(B)^{-1} int_B |l^B|^2)^{1/2}`, a lower bound for the norm
    /// of the functional.
    pub local_norm: f64,
    /// Largest `mu(B_alpha) / mu(B')` over chain links, `B'` the averaging set.
    pub d_measured: f64,
    pub l1_norm: f64,
    /// `sum_alpha mu(B_alpha) (||l|| + |eta^{B_alpha}|)`.
    pub covering_bound: f64,
    pub all_within_bound: bool,
}

/// Glues `locals` (one per level-`nu` center, on `B(z, b)`) starting from the
/// base center `o`, where `eta = 0`. Each correction is the mean of
/// `l^{parent} + eta^{parent} - l^{child}` over
/// `B' = B(z_child, a0 delta^nu) ∩ B_parent ∩ B_child`, along the fewest-hop
/// chain of links shorter than `b/2`.
#[allow(clippy::too_many_arguments)]
pub fn glue_representatives(
    space: &FiniteMetricMeasureSpace,
    nets: &NetHierarchy,
    nu: i32,
    b: f64,
    beta: f64,
    a0: f64,
    locals: &[LocalRepresentative],
    o: usize,
) -> Result<GlueReport> {
    let centers = nets
        .level(nu)
        .ok_or_else(|| Error::Input(format!("net level {nu} not built")))?
        .to_vec();
    if !(b > 4.0 * nets.radius(nu)) {
        return input(format!(
            "b = {b} must exceed 4 delta^nu = {}",
            4.0 * nets.radius(nu)
        ));
    }
    let k = centers.len();
    let mut slot = vec![usize::MAX; k];
    for (i, l) in locals.iter().enumerate() {
        let j = centers.binary_search(&l.center).map_err(|_| {
            Error::Input(format!("local at {} is not a level-{nu} center", l.center))
        })?;
        slot[j] = i;
    }
    if let Some(j) = slot.iter().position(|&s| s == usize::MAX) {
        return input(format!("no local representative for center {}", centers[j]));
    }
    let base = centers
        .binary_search(&o)
        .map_err(|_| Error::Input(format!("base {o} is not a level-{nu} center")))?;
    let n = space.len();
    // dense per-ball tables, NaN off the ball
    let mut table = vec![vec![f64::NAN; n]; k];
    let mut ball_mass = vec![0.0; k];
    let mut local_norm = 0.0f64;
    for j in 0..k {
        let l = &locals[slot[j]];
        if l.members != space.ball(l.center, b) || l.values.len() != l.members.len() {
            return input(format!("local at {} is not given on B(z, {b})", l.center));
        }
        let w = space.set_mass(&l.members);
        let mean: f64 = l
            .members
            .iter()
            .zip(&l.values)
            .map(|(&x, v)| v * space.mass(x))
            .sum();
        let l1: f64 = l
            .members
            .iter()
            .zip(&l.values)
            .map(|(&x, v)| v.abs() * space.mass(x))
            .sum();
        // a local of a function constant on the ball is pure rounding noise,
        // so an average below 1e-12 passes whatever its relative size
        if mean.abs() > GLUE_TOLERANCE * l1 && mean.abs() > 1e-12 * w {
            return input(format!(
                "local at {} does not have mean zero ({mean:e} vs {l1:e}, mass {w:e})",
                l.center
            ));
        }
        let l2: f64 = l
            .members
            .iter()
            .zip(&l.values)
            .map(|(&x, v)| v * v * space.mass(x))
            .sum();
        local_norm = local_norm.max((l2 / w).sqrt());
        ball_mass[j] = w;
        for (&x, &v) in l.members.iter().zip(&l.values) {
            table[j][x] = v;
        }
    }
    let scale = locals
        .iter()
        .flat_map(|l| l.values.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    // overlaps must differ by constants
    for i in 0..k {
        for j in i + 1..k {
            if space.dist(centers[i], centers[j]) > 2.0 * b {
                continue;
            }
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (&u, &v) in table[i].iter().zip(&table[j]) {
                if !u.is_nan() && !v.is_nan() {
                    lo = lo.min(u - v);
                    hi = hi.max(u - v);
                }
            }
            if hi - lo > GLUE_TOLERANCE * scale {
                return Err(Error::Consistency {
                    first: centers[i],
                    second: centers[j],
                    spread: hi - lo,
                });
            }
        }
    }
    // fewest-hop chains from the base
    let mut parent = vec![usize::MAX; k];
    let mut hops = vec![0usize; k];
    parent[base] = base;
    let mut queue = VecDeque::from([base]);
    let mut order = vec![];
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for v in 0..k {
            if parent[v] == usize::MAX && space.dist(centers[u], centers[v]) < b / 2.0 {
                parent[v] = u;
                hops[v] = hops[u] + 1;
                queue.push_back(v);
            }
        }
    }
    if let Some(v) = parent.iter().position(|&p| p == usize::MAX) {
        return Err(Error::Geometry {
            from: o,
            to: centers[v],
            reason: format!("no chain of links shorter than b/2 = {}", b / 2.0),
        });
    }
    let small = a0 * nets.radius(nu);
    let mut eta = vec![0.0; k];
    let mut d_measured = 1.0f64;
    for &v in order.iter().skip(1) {
        let p = parent[v];
        let avg: Vec<usize> = (0..n)
            .filter(|&x| {
                space.dist(centers[v], x) <= small && !table[p][x].is_nan() && !table[v][x].is_nan()
            })
            .collect();
        // z_child lies in both balls, so the set is never empty
        let w = space.set_mass(&avg);
        let diff: f64 = avg
            .iter()
            .map(|&x| (table[p][x] + eta[p] - table[v][x]) * space.mass(x))
            .sum();
        eta[v] = diff / w;
        d_measured = d_measured.max(ball_mass[p].max(ball_mass[v]) / w);
    }
    let root_d = d_measured.sqrt();
    let mut corrections = Vec::with_capacity(k);
    for j in 0..k {
        let d = space.dist(o, centers[j]);
        let points = hops[j] + 1;
        let chain_bound = 2.0 * hops[j] as f64 * root_d * local_norm;
        let closed_bound = if j == base {
            0.0
        } else {
            (chain_length_bound(d, b, beta) - 1.0).max(1.0) * 2.0 * root_d * local_norm
        };
        let slack = 1e-12 * (local_norm * root_d).max(f64::MIN_POSITIVE);
        corrections.push(BallCorrection {
            center: centers[j],
            eta: eta[j],
            distance: d,
            chain_points: points,
            chain_bound,
            closed_bound,
            within_bound: eta[j].abs() <= chain_bound + slack
                && eta[j].abs() <= closed_bound + slack,
        });
    }
    // f^l from the first ball containing each point
    let mut values = vec![f64::NAN; n];
    for x in 0..n {
        if let Some(j) = (0..k).find(|&j| !table[j][x].is_nan()) {
            values[x] = table[j][x] + eta[j];
        }
    }
    if let Some(x) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Geometry {
            from: x,
            to: x,
            reason: "point lies in no ball of the covering".into(),
        });
    }
    let covering_bound = (0..k)
        .map(|j| ball_mass[j] * (local_norm + eta[j].abs()))
        .sum();
    Ok(GlueReport {
        base: o,
        b,
        beta,
        l1_norm: space.lp_norm(&values, 1.0),
        values,
        all_within_bound: corrections.iter().all(|c| c.within_bound),
        corrections,
        local_norm,
        d_measured,
        covering_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::christ_cubes::build_nets;

    fn setup() -> (FiniteMetricMeasureSpace, NetHierarchy) {
        let h = 0.05;
        let pts: Vec<Vec<f64>> = (0..81).map(|i| vec![i as f64 * h - 2.0]).collect();
        let m = pts.iter().map(|p| (-p[0] * p[0]).exp() * h).collect();
        let s = FiniteMetricMeasureSpace::euclidean(pts, m).unwrap();
        let nets = build_nets(&s, 0.5, None).unwrap();
        (s, nets)
    }

    fn locals(
        s: &FiniteMetricMeasureSpace,
        nets: &NetHierarchy,
        nu: i32,
        f: &[f64],
        b: f64,
    ) -> Vec<LocalRepresentative> {
        nets.level(nu)
            .unwrap()
            .iter()
            .map(|&z| LocalRepresentative::from_function(s, f, z, b))
            .collect()
    }

    #[test]
    fn hidden_function_is_recovered_up_to_a_constant() {
        let (s, nets) = setup();
        let nu = nets.k_min + 6;
        let b = 1.0;
        let f: Vec<f64> = (0..81)
            .map(|i| (i as f64 * 0.37).sin() + 0.01 * i as f64)
            .collect();
        let o = nets.level(nu).unwrap()[0];
        let rep = glue_representatives(
            &s,
            &nets,
            nu,
            b,
            0.6,
            0.25,
            &locals(&s, &nets, nu, &f, b),
            o,
        )
        .unwrap();
        let shift = rep.values[0] - f[0];
        let dev = rep
            .values
            .iter()
            .zip(&f)
            .map(|(g, f)| (g - f - shift).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9, "{dev}");
        assert!(rep.all_within_bound);
        let base = rep.corrections.iter().find(|c| c.center == o).unwrap();
        assert_eq!(base.eta, 0.0);
        assert!(rep.l1_norm <= rep.covering_bound);
    }

    #[test]
    fn single_ball_is_returned_unchanged() {
        let (s, nets) = setup();
        let nu = nets.k_min;
        let f: Vec<f64> = (0..81).map(|i| (i as f64).cos()).collect();
        let ls = locals(&s, &nets, nu, &f, 40.0);
        assert_eq!(ls.len(), 1);
        let rep = glue_representatives(&s, &nets, nu, 40.0, 0.6, 0.25, &ls, ls[0].center).unwrap();
        for (x, v) in rep.values.iter().enumerate() {
            assert_eq!(*v, ls[0].values[x]);
        }
    }

    #[test]
    fn inconsistent_overlap_is_reported() {
        let (s, nets) = setup();
        let nu = nets.k_min + 6;
        let f: Vec<f64> = (0..81).map(|i| i as f64 * 0.1).collect();
        let mut ls = locals(&s, &nets, nu, &f, 1.0);
        // perturb one value, then restore the mean
        let l = &mut ls[1];
        l.values[0] += 1.0;
        let w: f64 = l.members.iter().map(|&x| s.mass(x)).sum();
        let shift = s.mass(l.members[0]) / w;
        l.values.iter_mut().for_each(|v| *v -= shift);
        let o = ls[0].center;
        assert!(matches!(
            glue_representatives(&s, &nets, nu, 1.0, 0.6, 0.25, &ls, o),
            Err(Error::Consistency { .. })
        ));
    }
}
