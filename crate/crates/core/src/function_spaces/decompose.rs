//! Certified atomic decompositions by local pieces and tree transport.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::atoms::{exponent, Atom};
use super::bmo::check_values;
use crate::christ_cubes::NetHierarchy;
use crate::discrete_space::{FiniteMetricMeasureSpace, GeometryParams};
use crate::error::{input, Error, Result};

/// Relative size below which the mean of `f` is treated as zero.
const MEAN_ZERO: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub lambda: f64,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub b: f64,
    #[serde(with = "exponent")]
    pub r: f64,
    pub terms: Vec<Term>,
    /// `f - sum lambda_k a_k`.
    pub residual: Vec<f64>,
    /// `sum |lambda_k|`, an upper bound for the `H^1_b` norm.
    pub h1_bound: f64,
}

impl Decomposition {
    pub fn reconstruct(&self, space: &FiniteMetricMeasureSpace) -> Vec<f64> {
        let mut out = vec![0.0; space.len()];
        for t in &self.terms {
            t.atom.accumulate(space, t.lambda, &mut out);
        }
        out
    }

    /// `int f g dmu` for the reconstructed `g`, summed term by term.
    pub fn pair(&self, space: &FiniteMetricMeasureSpace, f: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.lambda * t.atom.pair(space, f))
            .sum()
    }

    pub fn residual_l1(&self, space: &FiniteMetricMeasureSpace) -> f64 {
        space.lp_norm(&self.residual, 1.0)
    }

    pub fn all_atoms_pass(&self, space: &FiniteMetricMeasureSpace) -> bool {
        self.terms
            .iter()
            .all(|t| t.atom.check(space, self.b, self.r).passes)
    }
}

/// A piece whose `L^1` norm is rounding noise against `scale`, the norm of
/// the terms that cancelled to produce it, is left in the residual: once
/// normalized it would be an atom of noise, with no mean-zero structure.
fn cancelled(space: &FiniteMetricMeasureSpace, sup: &[usize], v: &[f64], scale: f64) -> bool {
    let l1: f64 = sup
        .iter()
        .zip(v)
        .map(|(&x, y)| space.mass(x) * y.abs())
        .sum();
    l1 <= 64.0 * f64::EPSILON * scale
}

fn finish(
    space: &FiniteMetricMeasureSpace,
    f: &[f64],
    b: f64,
    r: f64,
    terms: Vec<Term>,
) -> Decomposition {
    let mut d = Decomposition {
        b,
        r,
        h1_bound: terms.iter().map(|t| t.lambda.abs()).sum(),
        terms,
        residual: vec![],
    };
    let g = d.reconstruct(space);
    d.residual = f.iter().zip(g).map(|(a, b)| a - b).collect();
    d
}

/// Writes `f` as a finite sum of `(1, r)`-atoms on balls of radius `<= b`
/// plus a multiple of the exceptional atom.
///
/// The mean goes to the exceptional atom. If the rest fits in one ball of
/// radius `<= b` it is a single atom. Otherwise it is cut along the Voronoi
/// cells of the level-`nu` net; each cell piece is made mean zero by
/// subtracting its integral spread over `E = B(z, b/4)`, and the spread
/// masses are moved to the root along a breadth-first tree whose links are
/// shorter than `b/2`. Each move is a multiple of `1_E/mu(E) - 1_E'/mu(E')`,
/// supported in a ball of radius `< 3b/4`.
pub fn atomic_decompose(
    space: &FiniteMetricMeasureSpace,
    f: &[f64],
    params: &GeometryParams,
    nets: &NetHierarchy,
    nu: i32,
    r: f64,
) -> Result<Decomposition> {
    check_values(space, f)?;
    params.require_admissible_scale()?;
    if !(r > 1.0) {
        return input("atom exponent r must lie in (1, inf]");
    }
    let b = params.b;
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
    let n = space.len();
    let total = space.total_mass();
    let integral = space.integrate(f);
    let l1 = space.lp_norm(f, 1.0);
    let mut terms = vec![];
    let mean = if integral.abs() <= MEAN_ZERO * l1 {
        0.0
    } else {
        integral / total
    };
    if mean != 0.0 {
        terms.push(Term {
            lambda: mean * total,
            atom: Atom::Exceptional,
        });
    }
    let g: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let support: Vec<usize> = (0..n).filter(|&x| g[x] != 0.0).collect();
    if support.is_empty() {
        return Ok(finish(space, f, b, r, terms));
    }

    // one ball holds the whole support: a single atom
    let mut single: Option<(f64, usize)> = None;
    for c in 0..n {
        let radius = support
            .iter()
            .map(|&x| space.dist(c, x))
            .fold(0.0, f64::max);
        if radius <= b {
            let mass = space.ball_mass(c, radius);
            if single.is_none_or(|(m, _)| mass < m) {
                single = Some((mass, c));
            }
        }
    }
    if let Some((_, c)) = single {
        let values = support.iter().map(|&x| g[x]).collect();
        if let Some((lambda, atom)) = Atom::normalize(space, c, support, values, r) {
            terms.push(Term { lambda, atom });
        }
        return Ok(finish(space, f, b, r, terms));
    }

    // Voronoi cells of the net, ties to the smaller center
    let k = centers.len();
    let mut cell = vec![0usize; n];
    for (x, slot) in cell.iter_mut().enumerate() {
        let mut best = (f64::INFINITY, 0);
        for (j, &z) in centers.iter().enumerate() {
            let d = space.dist(x, z);
            if d < best.0 {
                best = (d, j);
            }
        }
        *slot = best.1;
    }
    let spread: Vec<Vec<usize>> = centers.iter().map(|&z| space.ball(z, b / 4.0)).collect();
    let spread_mass: Vec<f64> = spread.iter().map(|e| space.set_mass(e)).collect();
    let mut cells: Vec<Vec<usize>> = vec![vec![]; k];
    for x in 0..n {
        cells[cell[x]].push(x);
    }
    let s: Vec<f64> = cells
        .iter()
        .map(|c| c.iter().map(|&x| g[x] * space.mass(x)).sum())
        .collect();

    // local pieces g 1_V - s 1_E / mu(E)
    for j in 0..k {
        let mut vals = std::collections::BTreeMap::new();
        for &x in &cells[j] {
            *vals.entry(x).or_insert(0.0) += g[x];
        }
        let level = s[j] / spread_mass[j];
        if level != 0.0 {
            for &x in &spread[j] {
                *vals.entry(x).or_insert(0.0) -= level;
            }
        }
        let (sup, v): (Vec<usize>, Vec<f64>) = vals.into_iter().filter(|e| e.1 != 0.0).unzip();
        let scale = cells[j]
            .iter()
            .map(|&x| space.mass(x) * g[x].abs())
            .sum::<f64>()
            + s[j].abs();
        if cancelled(space, &sup, &v, scale) {
            continue;
        }
        if let Some((lambda, atom)) = Atom::normalize(space, centers[j], sup, v, r) {
            terms.push(Term { lambda, atom });
        }
    }

    // breadth-first tree over links shorter than b/2, rooted at the first center
    let mut parent = vec![usize::MAX; k];
    let mut order = Vec::with_capacity(k);
    let mut queue = VecDeque::from([0usize]);
    parent[0] = 0;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for v in 0..k {
            if parent[v] == usize::MAX && space.dist(centers[u], centers[v]) < b / 2.0 {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    if let Some(v) = parent.iter().position(|&p| p == usize::MAX) {
        return Err(Error::Geometry {
            from: centers[0],
            to: centers[v],
            reason: format!("no chain of links shorter than b/2 = {}", b / 2.0),
        });
    }
    // subtree sums, leaves first
    let mut flow = s.clone();
    for &v in order.iter().skip(1).rev() {
        let p = parent[v];
        flow[p] += flow[v];
    }
    for &v in order.iter().skip(1) {
        if flow[v] == 0.0 {
            continue;
        }
        let p = parent[v];
        let mut vals = std::collections::BTreeMap::new();
        for &x in &spread[v] {
            *vals.entry(x).or_insert(0.0) += flow[v] / spread_mass[v];
        }
        for &x in &spread[p] {
            *vals.entry(x).or_insert(0.0) -= flow[v] / spread_mass[p];
        }
        let (sup, vv): (Vec<usize>, Vec<f64>) = vals.into_iter().filter(|e| e.1 != 0.0).unzip();
        if cancelled(space, &sup, &vv, 2.0 * flow[v].abs()) {
            continue;
        }
        if let Some((lambda, atom)) = Atom::normalize(space, centers[v], sup, vv, r) {
            terms.push(Term { lambda, atom });
        }
    }
    Ok(finish(space, f, b, r, terms))
}
