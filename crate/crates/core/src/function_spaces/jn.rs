//! John–Nirenberg tail profiles on a single ball.

use serde::{Deserialize, Serialize};

use super::balls::{BallFamily, BallRef};
use super::bmo::{bmo_norm_on, check_values};
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};
use crate::stats::{ols, LineFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JnProfile {
    pub ball: BallRef,
    pub ball_mass: f64,
    pub mean: f64,
    /// `N_b^1(f)`, the normalization of `s`.
    pub n1: f64,
    /// `(s, mu({x in B : |f(x) - f_B| > s}))`.
    pub curve: Vec<(f64, f64)>,
    /// Fit of `ln(tail / mu(B))` against `s / N_b^1(f)`.
    pub fit: Option<LineFit>,
    /// Fitted `c` and `C` of `tail <= C e^{-c s / N} mu(B)`.
    pub c: Option<f64>,
    pub big_c: Option<f64>,
    pub nonincreasing: bool,
}

/// `n` evenly spaced levels from 0 to `max |f - f_B|` on the ball, both ends
/// included.
pub fn default_s_grid(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    ball: &BallRef,
    f: &[f64],
    n: usize,
) -> Vec<f64> {
    let members = fam.members(ball);
    let mean = ball_mean(space, members, f);
    let top = members
        .iter()
        .map(|&y| (f[y as usize] - mean).abs())
        .fold(0.0, f64::max);
    (0..n)
        .map(|i| top * i as f64 / (n.max(2) - 1) as f64)
        .collect()
}

fn ball_mean(space: &FiniteMetricMeasureSpace, members: &[u32], f: &[f64]) -> f64 {
    let m = space.masses();
    let w: f64 = members.iter().map(|&y| m[y as usize]).sum();
    members
        .iter()
        .map(|&y| m[y as usize] * f[y as usize])
        .sum::<f64>()
        / w
}

/// Exact tail masses on `ball` and a log-linear fit over the levels where
/// the tail lies strictly between 0 and `mu(B)`.
pub fn john_nirenberg_profile(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    f: &[f64],
    ball: &BallRef,
    s_grid: &[f64],
) -> Result<JnProfile> {
    check_values(space, f)?;
    let n1 = bmo_norm_on(space, fam, f, 1.0)?.n;
    if n1 == 0.0 {
        return input("N_b^1(f) = 0, the tail normalization is undefined");
    }
    let members = fam.members(ball);
    let m = space.masses();
    let ball_mass: f64 = members.iter().map(|&y| m[y as usize]).sum();
    let mean = ball_mean(space, members, f);
    let mut dev: Vec<(f64, f64)> = members
        .iter()
        .map(|&y| ((f[y as usize] - mean).abs(), m[y as usize]))
        .collect();
    dev.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut grid = s_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let curve: Vec<(f64, f64)> = grid
        .iter()
        .map(|&s| (s, dev.iter().take_while(|e| e.0 > s).map(|e| e.1).sum()))
        .collect();
    let nonincreasing = curve.windows(2).all(|w| w[1].1 <= w[0].1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .iter()
        .filter(|&&(s, t)| s > 0.0 && t > 0.0 && t < ball_mass)
        .map(|&(s, t)| (s / n1, (t / ball_mass).ln()))
        .unzip();
    let fit = ols(&xs, &ys);
    Ok(JnProfile {
        ball: *ball,
        ball_mass,
        mean,
        n1,
        curve,
        c: fit.map(|l| -l.slope),
        big_c: fit.map(|l| l.intercept.exp()),
        fit,
        nonincreasing,
    })
}
