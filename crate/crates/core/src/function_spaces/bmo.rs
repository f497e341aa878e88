//! Mean oscillations over the ball family: `N_b^q`, the local sharp
//! function and scale comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::balls::{BallFamily, BallRef};
use crate::discrete_space::{FiniteMetricMeasureSpace, GeometryParams};
use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoResult {
    pub b: f64,
    pub q: f64,
    /// `N_b^q(f)`.
    pub n: f64,
    pub l1_norm: f64,
    /// `||f||_1 + N_b^q(f)`.
    pub total: f64,
    pub argmax: Option<BallRef>,
}

pub(crate) fn check_values(space: &FiniteMetricMeasureSpace, f: &[f64]) -> Result<()> {
    if f.len() != space.len() {
        return input(format!(
            "function has {} values for {} points",
            f.len(),
            space.len()
        ));
    }
    if let Some(i) = f.iter().position(|v| !v.is_finite()) {
        return input(format!("function value at point {i} is not finite"));
    }
    Ok(())
}

/// Prefix sums over value ranks, for `int_B |f - t| dmu` at any `t`.
struct Fenwick {
    mass: Vec<f64>,
    moment: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            mass: vec![0.0; n + 1],
            moment: vec![0.0; n + 1],
        }
    }

    fn clear(&mut self) {
        self.mass.iter_mut().for_each(|v| *v = 0.0);
        self.moment.iter_mut().for_each(|v| *v = 0.0);
    }

    fn add(&mut self, rank: usize, m: f64, mf: f64) {
        let mut i = rank + 1;
        while i < self.mass.len() {
            self.mass[i] += m;
            self.moment[i] += mf;
            i += i & i.wrapping_neg();
        }
    }

    /// Sums over ranks `< k`.
    fn prefix(&self, k: usize) -> (f64, f64) {
        let (mut m, mut mf) = (0.0, 0.0);
        let mut i = k;
        while i > 0 {
            m += self.mass[i];
            mf += self.moment[i];
            i &= i - 1;
        }
        (m, mf)
    }
}

/// `(mu(B)^{-1} int_B |f - f_B|^q dmu)^{1/q}` for every ball, grouped by
/// center in the family's order.
///
/// `q = 1` uses rank-indexed prefix sums and `q = 2` a running weighted
/// variance, both `O(log n)` per ball; other `q` sum each ball directly.
pub fn oscillations(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    f: &[f64],
    q: f64,
) -> Result<Vec<Vec<f64>>> {
    check_values(space, f)?;
    if !(q >= 1.0 && q.is_finite()) {
        return input("q must lie in [1, inf)");
    }
    let m = space.masses();
    let out = if q == 1.0 {
        let mut ranked: Vec<usize> = (0..f.len()).collect();
        ranked.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
        let sorted: Vec<f64> = ranked.iter().map(|&i| f[i]).collect();
        let mut rank = vec![0; f.len()];
        for (r, &i) in ranked.iter().enumerate() {
            rank[i] = r;
        }
        (0..fam.n_centers())
            .into_par_iter()
            .map_init(
                || Fenwick::new(f.len()),
                |fw, c| {
                    fw.clear();
                    let order = fam.order(c);
                    let (mut w, mut s) = (0.0, 0.0);
                    let mut added = 0;
                    fam.balls_at(c)
                        .map(|ball| {
                            for &y in &order[added..ball.len] {
                                let y = y as usize;
                                fw.add(rank[y], m[y], m[y] * f[y]);
                                w += m[y];
                                s += m[y] * f[y];
                            }
                            added = ball.len;
                            let mean = s / w;
                            let (lm, lf) = fw.prefix(sorted.partition_point(|&v| v <= mean));
                            let dev = (mean * lm - lf) + ((s - lf) - mean * (w - lm));
                            (dev / w).max(0.0)
                        })
                        .collect()
                },
            )
            .collect()
    } else if q == 2.0 {
        (0..fam.n_centers())
            .into_par_iter()
            .map(|c| {
                let order = fam.order(c);
                let (mut w, mut mean, mut m2) = (0.0, 0.0, 0.0);
                let mut added = 0;
                fam.balls_at(c)
                    .map(|ball| {
                        for &y in &order[added..ball.len] {
                            let y = y as usize;
                            w += m[y];
                            let delta = f[y] - mean;
                            // seed exactly: f m / m can miss f by an ulp, and the
                            // square root turns that into a 1e-8 oscillation
                            mean = if w == m[y] {
                                f[y]
                            } else {
                                mean + delta * m[y] / w
                            };
                            m2 += m[y] * delta * (f[y] - mean);
                        }
                        added = ball.len;
                        (m2 / w).max(0.0).sqrt()
                    })
                    .collect()
            })
            .collect()
    } else {
        (0..fam.n_centers())
            .into_par_iter()
            .map(|c| {
                fam.balls_at(c)
                    .map(|ball| direct_oscillation(space, fam.members(&ball), f, q))
                    .collect()
            })
            .collect()
    };
    Ok(out)
}

/// `(mu(B)^{-1} int_B |f - f_B|^q dmu)^{1/q}` summed term by term.
pub fn direct_oscillation(
    space: &FiniteMetricMeasureSpace,
    members: &[u32],
    f: &[f64],
    q: f64,
) -> f64 {
    let m = space.masses();
    let w: f64 = members.iter().map(|&y| m[y as usize]).sum();
    let mean = members
        .iter()
        .map(|&y| m[y as usize] * f[y as usize])
        .sum::<f64>()
        / w;
    let s: f64 = members
        .iter()
        .map(|&y| m[y as usize] * (f[y as usize] - mean).abs().powf(q))
        .sum();
    (s / w).powf(1.0 / q)
}

/// `N_b^q(f)` as the exact maximum over the family, with the first ball
/// (in center, radius order) attaining it.
pub fn bmo_norm_on(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    f: &[f64],
    q: f64,
) -> Result<BmoResult> {
    if fam.is_empty() {
        return input("empty ball family");
    }
    let osc = oscillations(space, fam, f, q)?;
    let mut best: (f64, Option<BallRef>) = (0.0, None);
    for (c, row) in osc.iter().enumerate() {
        for (ball, &v) in fam.balls_at(c).zip(row) {
            if best.1.is_none() || v > best.0 {
                best = (v, Some(ball));
            }
        }
    }
    let l1_norm = space.lp_norm(f, 1.0);
    Ok(BmoResult {
        b: fam.b,
        q,
        n: best.0,
        l1_norm,
        total: l1_norm + best.0,
        argmax: best.1,
    })
}

/// `N_b^q(f)` over all balls of radius at most `params.b`, which must exceed
/// `R0 / (1 - beta)`.
pub fn bmo_norm(
    space: &FiniteMetricMeasureSpace,
    f: &[f64],
    params: &GeometryParams,
    q: f64,
) -> Result<BmoResult> {
    params.require_admissible_scale()?;
    let fam = BallFamily::new(space, params.b)?;
    bmo_norm_on(space, &fam, f, q)
}

/// `f^{sharp,b}(x)`, the largest mean oscillation (`q = 1`) over family balls
/// containing `x`.
pub fn sharp_function_on(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    f: &[f64],
) -> Result<Vec<f64>> {
    let osc = oscillations(space, fam, f, 1.0)?;
    let n = space.len();
    let out = (0..fam.n_centers())
        .into_par_iter()
        .fold(
            || vec![0.0f64; n],
            |mut acc, c| {
                let order = fam.order(c);
                let balls: Vec<BallRef> = fam.balls_at(c).collect();
                // from the largest ball inward, the shell of ball k lies in
                // exactly the balls k, k+1, ...
                let mut running = 0.0f64;
                for k in (0..balls.len()).rev() {
                    running = running.max(osc[c][k]);
                    let start = if k == 0 { 0 } else { balls[k - 1].len };
                    for &y in &order[start..balls[k].len] {
                        acc[y as usize] = acc[y as usize].max(running);
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0.0f64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    Ok(out)
}

pub fn sharp_function(
    space: &FiniteMetricMeasureSpace,
    f: &[f64],
    params: &GeometryParams,
) -> Result<Vec<f64>> {
    params.require_admissible_scale()?;
    let fam = BallFamily::new(space, params.b)?;
    sharp_function_on(space, &fam, f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub b: f64,
    pub c: f64,
    pub q: f64,
    pub functions: usize,
    /// Functions with `N_c = 0`, left out of the ratios.
    pub skipped: usize,
    /// Extremes of `N_b / N_c` over the suite.
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// `N_c(f) <= N_b(f)` for every function.
    pub monotone: bool,
}

/// Compares `N_c^q` with `N_b^q` for `c < b` over a suite of functions.
pub fn verify_scale_independence(
    space: &FiniteMetricMeasureSpace,
    suite: &[Vec<f64>],
    params: &GeometryParams,
    c: f64,
    q: f64,
) -> Result<ScaleReport> {
    params.with_b(c).require_admissible_scale()?;
    if !(c < params.b) {
        return input("need c < b");
    }
    let fam_b = BallFamily::new(space, params.b)?;
    let fam_c = BallFamily::new(space, c)?;
    let mut ratios = vec![];
    let mut skipped = 0;
    let mut monotone = true;
    for f in suite {
        let nb = bmo_norm_on(space, &fam_b, f, q)?.n;
        let nc = bmo_norm_on(space, &fam_c, f, q)?.n;
        monotone &= nc <= nb;
        if nc == 0.0 {
            skipped += 1;
        } else {
            ratios.push(nb / nc);
        }
    }
    Ok(ScaleReport {
        b: params.b,
        c,
        q,
        functions: suite.len(),
        skipped,
        min_ratio: ratios.iter().cloned().reduce(f64::min),
        max_ratio: ratios.iter().cloned().reduce(f64::max),
        monotone,
    })
}
