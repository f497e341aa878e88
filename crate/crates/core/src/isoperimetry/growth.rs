//! Exponential growth of boundary layers and exponential decay of ball
//! complements.

use serde::{Deserialize, Serialize};

use super::layers::{distance_to_complement, layer_mass, Ball};
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};
use crate::stats::{ols, LineFit};

/// Relative mass below which points are left out of exponential fits.
pub const FIT_MASS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthMode {
    /// `mu(A_t) >= (1 - e^{-I t}) mu(A)` for `A` outside `B0`.
    Full,
    /// `mu(A_t) >= (1 - e^{-I t / 2}) mu(A) / 2` when `A ∩ B0 ⊆ A_t`.
    Half,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub t: f64,
    pub layer_mass: f64,
    pub bound: f64,
    pub pass: bool,
    /// Why the row was skipped (hypothesis not met), if it was.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub mode: GrowthMode,
    pub i: f64,
    pub set_mass: f64,
    pub rows: Vec<GrowthRow>,
    pub all_pass: bool,
}

pub fn verify_layer_growth(
    space: &FiniteMetricMeasureSpace,
    b0: &Ball,
    set: &[usize],
    i: f64,
    t_grid: &[f64],
    mode: GrowthMode,
) -> Result<GrowthReport> {
    let d = distance_to_complement(space, set)?;
    let total = space.set_mass(set);
    let meets_b0: Vec<usize> = (0..set.len())
        .filter(|&j| b0.contains(space, set[j]))
        .collect();
    let mut rows = vec![];
    for &t in t_grid {
        let lm = layer_mass(space, set, &d, t);
        let skipped = match mode {
            GrowthMode::Full if !meets_b0.is_empty() => {
                Some("set meets the closed ball B0".to_string())
            }
            GrowthMode::Half if meets_b0.iter().any(|&j| d[j] > t) => {
                Some("part of A ∩ B0 lies deeper than t".to_string())
            }
            _ => None,
        };
        let bound = match mode {
            GrowthMode::Full => (1.0 - (-i * t).exp()) * total,
            GrowthMode::Half => 0.5 * (1.0 - (-i * t / 2.0).exp()) * total,
        };
        let pass = skipped.is_some() || lm >= bound * (1.0 - 1e-12);
        rows.push(GrowthRow {
            t,
            layer_mass: lm,
            bound,
            pass,
            skipped,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(GrowthReport {
        mode,
        i,
        set_mass: total,
        rows,
        all_pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub center: usize,
    /// `(r, mu(B(x, r)^c))` for every grid radius.
    pub tail: Vec<(f64, f64)>,
    /// Least-squares fit of `log mu(B(x,r)^c)` against `r`.
    pub fit: Option<LineFit>,
    /// `-slope`.
    pub rate: Option<f64>,
    /// `e^{intercept}`.
    pub prefactor: Option<f64>,
    pub used: usize,
}

/// Fits `mu(B(x, r)^c) ~ C e^{-rate r}`; radii with an empty (or
/// negligible) complement are left out of the fit.
pub fn verify_complement_decay(
    space: &FiniteMetricMeasureSpace,
    x: usize,
    r_grid: &[f64],
) -> Result<DecayReport> {
    if x >= space.len() {
        return input("center out of range");
    }
    if r_grid.is_empty() {
        return input("empty radius grid");
    }
    let floor = FIT_MASS_FLOOR * space.total_mass();
    let mut tail = vec![];
    let (mut rs, mut logs) = (vec![], vec![]);
    for &r in r_grid {
        let outside: f64 = (0..space.len())
            .filter(|&y| space.dist(x, y) > r)
            .map(|y| space.mass(y))
            .sum();
        tail.push((r, outside));
        if outside > floor {
            rs.push(r);
            logs.push(outside.ln());
        }
    }
    let fit = ols(&rs, &logs);
    Ok(DecayReport {
        center: x,
        tail,
        rate: fit.as_ref().map(|f| -f.slope),
        prefactor: fit.as_ref().map(|f| f.intercept.exp()),
        fit,
        used: rs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_line() -> FiniteMetricMeasureSpace {
        // masses e^{-x} h on [0, 10]: tail beyond r is about e^{-r}
        let h = 0.01;
        let pts: Vec<Vec<f64>> = (0..=1000).map(|i| vec![i as f64 * h]).collect();
        let masses = pts.iter().map(|p| (-p[0]).exp() * h).collect();
        FiniteMetricMeasureSpace::euclidean(pts, masses).unwrap()
    }

    #[test]
    fn decay_rate_of_exponential_masses() {
        let s = exp_line();
        let grid: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let rep = verify_complement_decay(&s, 0, &grid).unwrap();
        assert!((rep.rate.unwrap() - 1.0).abs() < 0.02, "{rep:?}");
        let mut g2 = grid.clone();
        g2.push(20.0);
        assert_eq!(verify_complement_decay(&s, 0, &g2).unwrap().used, 8);
    }

    #[test]
    fn full_layer_growth_trivial_when_layer_is_everything() {
        let s = exp_line();
        let b0 = Ball {
            center: 0,
            radius: 0.5,
        };
        let set: Vec<usize> = (100..=200).collect();
        let rep = verify_layer_growth(&s, &b0, &set, 0.7, &[5.0, 10.0], GrowthMode::Full).unwrap();
        assert!(rep.all_pass);
        assert_eq!(rep.rows[0].layer_mass, rep.set_mass);
    }

    #[test]
    fn half_mode_skips_when_hypothesis_fails() {
        let s = exp_line();
        let b0 = Ball {
            center: 0,
            radius: 0.5,
        };
        let set: Vec<usize> = (0..=300).collect();
        let rep = verify_layer_growth(&s, &b0, &set, 1.0, &[0.05, 3.5], GrowthMode::Half).unwrap();
        assert!(rep.rows[0].skipped.is_some());
        assert!(rep.rows[1].skipped.is_none() && rep.rows[1].pass);
    }
}
