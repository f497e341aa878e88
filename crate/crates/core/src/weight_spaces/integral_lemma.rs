//! Empirical constants for the layer-integral lower bounds
//! `int_tau^{tau + a h} e^psi r^{d-1} >= C a int_0^{tau + a h} e^psi r^{d-1}`
//! and its reflected tail version for `e^{-psi}`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailDirection {
    /// `int_tau^{tau+ah} e^psi r^{d-1} dr` against `a int_0^{tau+ah}`.
    Lower,
    /// `int_{tau-ah}^tau e^{-psi} r^{d-1} dr` against `a int_{tau-ah}^inf`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Largest midpoint cell.
    pub max_step: f64,
    /// Fewest cells on any interval.
    pub min_cells: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            max_step: 1e-3,
            min_cells: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralLemmaReport {
    pub direction: TailDirection,
    pub dimension: usize,
    /// Infimum over the grid of `LHS / (a RHS)`.
    pub constant: f64,
    pub worst_tau: f64,
    pub worst_a: f64,
    pub evaluated: usize,
    /// Grid points skipped: `a = 0`, or `tau - a h(tau) < 0` in the upper case.
    pub skipped: usize,
}

/// `log int_lo^hi e^{s(r)} r^{d-1} dr` by the midpoint rule, computed with a
/// shift so large exponents do not overflow. Returns `-inf` for empty ranges.
fn log_integral(
    s: &dyn Fn(f64) -> f64,
    d: usize,
    lo: f64,
    hi: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    if hi <= lo {
        return Ok(f64::NEG_INFINITY);
    }
    let cells = (((hi - lo) / q.max_step).ceil() as usize).max(q.min_cells);
    let step = (hi - lo) / cells as f64;
    let mut logs = Vec::with_capacity(cells);
    for i in 0..cells {
        let r = lo + (i as f64 + 0.5) * step;
        let v = s(r);
        if v.is_nan() {
            return Err(Error::Quadrature(format!(
                "integrand exponent is NaN at r = {r}"
            )));
        }
        logs.push(v + (d as f64 - 1.0) * r.ln());
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::INFINITY {
        return Err(Error::Quadrature("integrand overflows".into()));
    }
    if top == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    Ok(top + (sum * step).ln())
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `log int_lo^inf e^{-psi} r^{d-1}`, summed in unit chunks until a chunk
/// adds less than `1e-16` relative.
fn log_tail(psi: &dyn Fn(f64) -> f64, d: usize, lo: f64, q: &QuadratureConfig) -> Result<f64> {
    let neg = |r: f64| -psi(r);
    let mut acc = f64::NEG_INFINITY;
    let mut start = lo;
    for _ in 0..100_000 {
        let chunk = log_integral(&neg, d, start, start + 1.0, q)?;
        let before = acc;
        acc = log_add(acc, chunk);
        start += 1.0;
        if acc.is_finite() && chunk - before < (1e-16f64).ln() {
            return Ok(acc);
        }
    }
    Err(Error::Quadrature(format!(
        "tail integral from {lo} does not converge"
    )))
}

/// Infimum of `LHS / (a RHS)` over `tau_grid x a_grid`, skipping `a = 0`.
///
/// For [`TailDirection::Upper`] the `tau_grid` should start at the threshold
/// beyond which the bound is claimed.
pub fn verify_integral_lemma(
    psi: &dyn Fn(f64) -> f64,
    h: &dyn Fn(f64) -> f64,
    d: usize,
    direction: TailDirection,
    tau_grid: &[f64],
    a_grid: &[f64],
    quadrature: &QuadratureConfig,
) -> Result<IntegralLemmaReport> {
    if tau_grid.is_empty() || a_grid.is_empty() {
        return input("tau and a grids must be nonempty");
    }
    if d == 0 {
        return input("dimension must be at least 1");
    }
    if a_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return input("a grid must lie in [0, 1]");
    }
    if tau_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return input("tau grid must be finite and nonnegative");
    }
    if !(quadrature.max_step > 0.0) || quadrature.min_cells == 0 {
        return input("invalid quadrature configuration");
    }
    let mut best = f64::INFINITY;
    let (mut worst_tau, mut worst_a) = (f64::NAN, f64::NAN);
    let mut evaluated = 0;
    let mut skipped = 0;
    for &tau in tau_grid {
        let ht = h(tau);
        if !(ht > 0.0 && ht.is_finite()) {
            return input(format!("h({tau}) = {ht} is not positive"));
        }
        for &a in a_grid {
            if a == 0.0 {
                skipped += 1;
                continue;
            }
            let log_ratio = match direction {
                TailDirection::Lower => {
                    let end = tau + a * ht;
                    let lhs = log_integral(psi, d, tau, end, quadrature)?;
                    let rhs = log_add(log_integral(psi, d, 0.0, tau, quadrature)?, lhs);
                    lhs - rhs
                }
                TailDirection::Upper => {
                    let start = tau - a * ht;
                    if start < 0.0 {
                        skipped += 1;
                        continue;
                    }
                    let neg = |r: f64| -psi(r);
                    let lhs = log_integral(&neg, d, start, tau, quadrature)?;
                    let rhs = log_add(lhs, log_tail(psi, d, tau, quadrature)?);
                    lhs - rhs
                }
            };
            let ratio = log_ratio.exp() / a;
            evaluated += 1;
            if ratio < best {
                best = ratio;
                worst_tau = tau;
                worst_a = a;
            }
        }
    }
    if evaluated == 0 {
        return input("no grid point with a > 0 could be evaluated");
    }
    Ok(IntegralLemmaReport {
        direction,
        dimension: d,
        constant: best,
        worst_tau,
        worst_a,
        evaluated,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn linear_exponent_matches_closed_form() {
        let taus = grid(0.0, 10.0, 21);
        let a_grid = grid(0.0, 1.0, 11);
        let rep = verify_integral_lemma(
            &|r| r,
            &|_| 1.0,
            1,
            TailDirection::Lower,
            &taus,
            &a_grid,
            &QuadratureConfig::default(),
        )
        .unwrap();
        // closed form ratio e^{tau+a}(1 - e^{-a}) / (a (e^{tau+a} - 1)), whose
        // grid infimum sits at the largest tau and a = 1
        let oracle = taus
            .iter()
            .flat_map(|&t| a_grid[1..].iter().map(move |&a| (t, a)))
            .map(|(t, a)| (t + a).exp() * (1.0 - (-a).exp()) / (a * ((t + a).exp() - 1.0)))
            .fold(f64::INFINITY, f64::min);
        assert!(
            (rep.constant - oracle).abs() < 1e-6,
            "{} {}",
            rep.constant,
            oracle
        );
        assert!(rep.constant >= 1.0 - (-1.0f64).exp() - 1e-6);
        assert_eq!(rep.skipped, taus.len());
    }

    #[test]
    fn quadratic_exponent_has_positive_constant() {
        let rep = verify_integral_lemma(
            &|r| r * r,
            &|r| 1.0 / (1.0 + 2.0 * r),
            1,
            TailDirection::Lower,
            &grid(0.0, 10.0, 41),
            &grid(0.0, 1.0, 11),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(rep.constant > 0.1, "{rep:?}");
    }

    #[test]
    fn upper_tail_for_gaussian_exponent() {
        let rep = verify_integral_lemma(
            &|r| r * r,
            &|r| 1.0 / (1.0 + 2.0 * r),
            2,
            TailDirection::Upper,
            &grid(2.0, 12.0, 21),
            &grid(0.0, 1.0, 6),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(rep.constant > 0.1, "{rep:?}");
    }

    #[test]
    fn empty_grids_are_rejected() {
        let q = QuadratureConfig::default();
        assert!(
            verify_integral_lemma(&|r| r, &|_| 1.0, 1, TailDirection::Lower, &[], &[0.5], &q)
                .is_err()
        );
        assert!(verify_integral_lemma(
            &|r| r,
            &|_| 1.0,
            1,
            TailDirection::Lower,
            &[1.0],
            &[0.0],
            &q
        )
        .is_err());
    }
}
