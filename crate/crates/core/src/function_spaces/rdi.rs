//! The relative distributional inequality between `M_2 f` and
//! `f^{sharp,b'}`, and the sharp-maximal ratio.

use serde::{Deserialize, Serialize};

use super::balls::BallFamily;
use super::bmo::{check_values, sharp_function_on};
use super::maximal::{dyadic_maximal, weak_type_constant};
use crate::christ_cubes::DyadicCubeTree;
use crate::discrete_space::{estimate_doubling, FiniteMetricMeasureSpace};
use crate::error::{input, Error, Result};
use crate::isoperimetry::Ball;

/// Constants of the inequality, measured on one space and cube tree.
///
/// Lengths of the unit-resolution frame are scaled by `delta^{k_min}`, the
/// size of the coarsest cubes: `C1` and `a0` below are in that frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdiParams {
    pub min_level: i32,
    /// `delta^{k_min}`.
    pub unit: f64,
    pub c1: f64,
    pub a0: f64,
    pub c0: f64,
    /// `2 C1 + C0`.
    pub b_prime: f64,
    /// `C1 delta^2`.
    pub kappa: f64,
    pub i_hat: f64,
    /// `(1 - e^{-I C1 delta^2 / 2}) / 4`.
    pub sigma: f64,
    /// `D_{b'/a0, a0}` on concentric balls.
    pub d: f64,
    pub b0: Ball,
    /// `inf mu(Q)` over resolution-2 cubes meeting the closed `B0`.
    pub omega: f64,
    /// Measured `||M_2||_{1;1,inf}`.
    pub weak: f64,
    /// `2 weak / omega`.
    pub big_m: f64,
    pub eta_prime: f64,
    pub epsilon: f64,
    /// `1 - sigma + 2 eps D / (sigma (1 - eta'))`.
    pub eta: f64,
}

impl RdiParams {
    /// Measures every constant; `epsilon` defaults to `(1 - eta') / (4 D)`.
    pub fn measure(
        space: &FiniteMetricMeasureSpace,
        tree: &DyadicCubeTree,
        b0: &Ball,
        i_hat: f64,
        c0: f64,
        eta_prime: f64,
        epsilon: Option<f64>,
    ) -> Result<Self> {
        if !(eta_prime > 0.0 && eta_prime < 1.0) {
            return input("eta' must lie in (0, 1)");
        }
        if !(i_hat > 0.0) || !(c0 > 0.0) {
            return input("I and C0 must be positive");
        }
        let min_level = tree.k_min() + 2;
        if min_level > tree.k_max() {
            return Err(Error::Configuration(format!(
                "the cube tree has no level of resolution 2 (levels {}..={})",
                tree.k_min(),
                tree.k_max()
            )));
        }
        let unit = tree.delta.powi(tree.k_min());
        let c1 = tree.c1 * unit;
        let a0 = tree.a0 * unit;
        let kappa = tree.c1 * tree.delta.powi(min_level);
        let b_prime = 2.0 * c1 + c0;
        let sigma = (1.0 - (-i_hat * kappa / 2.0).exp()) / 4.0;
        let all: Vec<usize> = (0..space.len()).collect();
        let d = estimate_doubling(space, a0, (b_prime / a0).max(2.0), &all)?.constant;
        let b0 = Ball {
            center: b0.center,
            radius: b0.radius.max(kappa),
        };
        let omega = tree
            .level(min_level)
            .unwrap()
            .cubes
            .iter()
            .filter(|q| q.members.iter().any(|&x| b0.contains(space, x)))
            .map(|q| space.set_mass(&q.members))
            .fold(f64::INFINITY, f64::min);
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Configuration(
                "no resolution-2 cube meets the closed ball B0".into(),
            ));
        }
        let weak = weak_type_constant(space, tree, min_level, 256, &[])?.constant;
        let big_m = 2.0 * weak / omega;
        let epsilon = epsilon.unwrap_or((1.0 - eta_prime) / (4.0 * d));
        if !(epsilon > 0.0 && epsilon < (1.0 - eta_prime) / (2.0 * d)) {
            return Err(Error::Configuration(format!(
                "epsilon = {epsilon} must lie in (0, (1 - eta')/(2D)) = (0, {})",
                (1.0 - eta_prime) / (2.0 * d)
            )));
        }
        let eta = 1.0 - sigma + 2.0 * epsilon * d / (sigma * (1.0 - eta_prime));
        Ok(RdiParams {
            min_level,
            unit,
            c1,
            a0,
            c0,
            b_prime,
            kappa,
            i_hat,
            sigma,
            d,
            b0,
            omega,
            weak,
            big_m,
            eta_prime,
            epsilon,
            eta,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdiRow {
    pub alpha: f64,
    /// `mu(A(alpha) ∩ S(eps alpha)^c)`.
    pub lhs: f64,
    /// `eta mu(A(eta' alpha))`.
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdiReport {
    pub l1_norm: f64,
    /// `M ||f||_1 / eta'`, the smallest admissible level.
    pub xi: f64,
    pub rows: Vec<RdiRow>,
    /// Grid levels below `xi`, outside the statement.
    pub skipped: usize,
    pub all_hold: bool,
}

/// `n` geometric levels from `xi` to just above `max M_2 f`.
pub fn default_alpha_grid(xi: f64, max_maximal: f64, n: usize) -> Vec<f64> {
    let top = (1.05 * max_maximal).max(xi);
    if n < 2 || top <= xi || xi <= 0.0 {
        return vec![xi.max(f64::MIN_POSITIVE)];
    }
    (0..n)
        .map(|i| xi * (top / xi).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Checks `mu(A(alpha) ∩ S(eps alpha)^c) <= eta mu(A(eta' alpha))` with exact
/// level sets, for every grid level at or above `xi`. `fam` must be the ball
/// family of scale `b'`.
pub fn rdi_check(
    space: &FiniteMetricMeasureSpace,
    tree: &DyadicCubeTree,
    f: &[f64],
    params: &RdiParams,
    fam: &BallFamily,
    alpha_grid: Option<&[f64]>,
) -> Result<RdiReport> {
    check_values(space, f)?;
    if (fam.b - params.b_prime).abs() > 1e-12 * params.b_prime {
        return input(format!(
            "ball family scale {} is not b' = {}",
            fam.b, params.b_prime
        ));
    }
    let mf = dyadic_maximal(space, tree, f, params.min_level)?;
    let sharp = sharp_function_on(space, fam, f)?;
    let l1_norm = space.lp_norm(f, 1.0);
    let xi = params.big_m * l1_norm / params.eta_prime;
    let grid = match alpha_grid {
        Some(g) => g.to_vec(),
        None => default_alpha_grid(xi, mf.iter().cloned().fold(0.0, f64::max), 24),
    };
    let m = space.masses();
    let mut rows = vec![];
    let mut skipped = 0;
    for &alpha in &grid {
        if alpha < xi || !(alpha > 0.0) {
            skipped += 1;
            continue;
        }
        let lhs: f64 = (0..space.len())
            .filter(|&x| mf[x] > alpha && sharp[x] <= params.epsilon * alpha)
            .map(|x| m[x])
            .sum();
        let wide: f64 = (0..space.len())
            .filter(|&x| mf[x] > params.eta_prime * alpha)
            .map(|x| m[x])
            .sum();
        let rhs = params.eta * wide;
        rows.push(RdiRow {
            alpha,
            lhs,
            rhs,
            holds: lhs <= rhs,
        });
    }
    Ok(RdiReport {
        l1_norm,
        xi,
        all_hold: rows.iter().all(|r| r.holds),
        rows,
        skipped,
    })
}

/// `(||f||_1 + ||f^{sharp,b'}||_p) / ||f||_p`; `None` for `f = 0`.
pub fn fefferman_stein_ratio(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    f: &[f64],
    p: f64,
) -> Result<Option<f64>> {
    if !(p > 1.0 && p.is_finite()) {
        return input("p must lie in (1, inf)");
    }
    let norm = space.lp_norm(f, p);
    if norm == 0.0 {
        return Ok(None);
    }
    let sharp = sharp_function_on(space, fam, f)?;
    Ok(Some(
        (space.lp_norm(f, 1.0) + space.lp_norm(&sharp, p)) / norm,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeffermanSteinReport {
    pub p: f64,
    pub b_prime: f64,
    pub functions: usize,
    pub skipped: usize,
    /// Smallest ratio over the suite, the measured constant `C`.
    pub min_ratio: Option<f64>,
    pub worst: Option<usize>,
}

pub fn fefferman_stein_check(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    suite: &[Vec<f64>],
    p: f64,
) -> Result<FeffermanSteinReport> {
    let mut best: Option<(f64, usize)> = None;
    let mut skipped = 0;
    for (i, f) in suite.iter().enumerate() {
        match fefferman_stein_ratio(space, fam, f, p)? {
            Some(r) if best.is_none_or(|(b, _)| r < b) => best = Some((r, i)),
            Some(_) => {}
            None => skipped += 1,
        }
    }
    Ok(FeffermanSteinReport {
        p,
        b_prime: fam.b,
        functions: suite.len(),
        skipped,
        min_ratio: best.map(|b| b.0),
        worst: best.map(|b| b.1),
    })
}
