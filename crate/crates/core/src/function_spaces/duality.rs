//! The pairing between `BMO^{r'}` functions and atomic decompositions.

use serde::{Deserialize, Serialize};

use super::bmo::BmoResult;
use super::decompose::Decomposition;
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

/// Conjugate exponent, with `inf' = 1`.
pub fn conjugate(r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityPair {
    /// `int f g dmu` with `g = sum lambda_k a_k`.
    pub pairing: f64,
    pub h1_bound: f64,
    /// `(||f||_1 + N_b^{r'}(f)) sum |lambda_k|`.
    pub bound: f64,
    /// `(max(1, 1/mu(M)) ||f||_1 + N_b^{r'}(f)) sum |lambda_k|`, which also
    /// covers the exceptional atom when `mu(M) < 1`.
    pub general_bound: f64,
    pub holds: bool,
    pub holds_general: bool,
    /// `bound - |pairing|`.
    pub slack: f64,
}

/// Evaluates `|int f g| <= ||f||_{BMO} sum |lambda_k|` for one pair. `bmo`
/// must be computed with `q = r'` on the same scale as the decomposition.
pub fn duality_check(
    space: &FiniteMetricMeasureSpace,
    f: &[f64],
    bmo: &BmoResult,
    g: &Decomposition,
) -> Result<DualityPair> {
    if (bmo.q - conjugate(g.r)).abs() > 1e-12 * bmo.q {
        return input(format!(
            "BMO exponent {} is not conjugate to r = {}",
            bmo.q, g.r
        ));
    }
    if bmo.b < g.b {
        return input("the BMO scale must cover the atoms' balls");
    }
    let pairing = g.pair(space, f);
    let bound = bmo.total * g.h1_bound;
    let general_bound = ((1.0f64).max(1.0 / space.total_mass()) * bmo.l1_norm + bmo.n) * g.h1_bound;
    // rounding in the pairing sum is far below this margin
    let tol = 1e-12 * general_bound.max(f64::MIN_POSITIVE);
    Ok(DualityPair {
        pairing,
        h1_bound: g.h1_bound,
        bound,
        general_bound,
        holds: pairing.abs() <= bound + tol,
        holds_general: pairing.abs() <= general_bound + tol,
        slack: bound - pairing.abs(),
    })
}
