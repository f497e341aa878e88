//! Empirical tameness and admissibility of a weight.

use serde::{Deserialize, Serialize};

use super::spec::WeightSpec;
use crate::error::{input, Result};
use crate::region::{BoxRegion, Lattice};

/// Growth allowed between the inner half-box and the full box before a
/// sampled supremum counts as unbounded.
pub const GROWTH_LIMIT: f64 = 1.5;
/// `|Hess phi| / |grad phi|^2` must stay below this on the outer shell.
pub const HESSIAN_RATIO_THRESHOLD: f64 = 0.1;
/// `d_r phi / |grad phi|` must stay above this on the outer shell.
pub const RADIAL_RATIO_THRESHOLD: f64 = 0.05;
/// Relative increase of `|grad phi|` required between successive ray samples.
pub const DIVERGENCE_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamenessReport {
    pub radius: f64,
    /// Sampled sup of `max(m(x)/m(y), m(y)/m(x))` over `|x - y| < R`.
    pub constant: f64,
    /// The same sup restricted to the inner half-box.
    pub constant_inner: f64,
    /// Sampled sup of `|grad m| / m`.
    pub log_gradient_sup: f64,
    pub log_gradient_sup_inner: f64,
    /// `|grad m| <= C m` looks uniformly bounded (no growth toward the box edge).
    pub analytic_flag: bool,
    pub verdict: bool,
    pub samples: usize,
}

struct Sampled {
    lattice: Lattice,
    m: Vec<f64>,
    log_grad: Vec<f64>,
    inner: Vec<bool>,
}

fn sample(spec: &WeightSpec, domain: &BoxRegion, per_axis: usize) -> Result<Sampled> {
    let side = domain
        .lo
        .iter()
        .zip(&domain.hi)
        .map(|(l, h)| h - l)
        .fold(f64::INFINITY, f64::min);
    // spacing from the shortest side; longer sides simply get more nodes
    let h = side / (per_axis - 1) as f64;
    let lattice = Lattice::over(domain, h)?;
    let inner_box = domain.scaled(0.5);
    let n = lattice.len();
    let mut m = Vec::with_capacity(n);
    let mut log_grad = Vec::with_capacity(n);
    let mut inner = Vec::with_capacity(n);
    for id in 0..n {
        let x = lattice.coords(id);
        let mx = spec.conformal_factor(&x)?;
        m.push(mx);
        log_grad.push(spec.conformal_gradient_norm(&x)? / mx);
        inner.push(inner_box.contains(&x));
    }
    Ok(Sampled {
        lattice,
        m,
        log_grad,
        inner,
    })
}

/// Sup of the ratio `m(x)/m(y)` over sampled node pairs with `|x-y| < R`,
/// over all nodes and over inner nodes only.
fn ratio_sup(s: &Sampled, radius: f64) -> (f64, f64) {
    let lat = &s.lattice;
    let d = lat.dim();
    let reach = (radius / lat.h).ceil() as i64;
    // offsets with |offset| h < R
    let mut offsets: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for o in &offsets {
            for k in -reach..=reach {
                let mut v = o.clone();
                v.push(k);
                next.push(v);
            }
        }
        offsets = next;
    }
    offsets.retain(|o| {
        let len2: i64 = o.iter().map(|k| k * k).sum();
        len2 > 0 && (len2 as f64).sqrt() * lat.h < radius
    });
    let mut full = 1.0f64;
    let mut inner = 1.0f64;
    for id in 0..lat.len() {
        let idx = lat.index_of(id);
        for o in &offsets {
            let mut nb = Vec::with_capacity(d);
            let mut ok = true;
            for j in 0..d {
                let v = idx[j] as i64 + o[j];
                if v < 0 || v >= lat.n_axis[j] as i64 {
                    ok = false;
                    break;
                }
                nb.push(v as usize);
            }
            if !ok {
                continue;
            }
            let other = lat.id_of(&nb);
            let r = s.m[id] / s.m[other];
            full = full.max(r);
            if s.inner[id] && s.inner[other] {
                inner = inner.max(r);
            }
        }
    }
    (full, inner)
}

/// Grid-sampled tameness constant `C(R)` of `m = 1 + |grad phi|` on `domain`.
///
/// `sample_count` is the number of grid nodes along the shortest side.
pub fn check_tame(
    spec: &WeightSpec,
    radius: f64,
    domain: &BoxRegion,
    sample_count: usize,
) -> Result<TamenessReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return input("tameness radius must be positive");
    }
    domain.validate()?;
    if domain.dim() != spec.dimension {
        return input("domain dimension differs from the weight dimension");
    }
    if sample_count < 3 {
        return input("need at least 3 samples per axis");
    }
    let s = sample(spec, domain, sample_count)?;
    let (constant, constant_inner) = ratio_sup(&s, radius);
    let log_gradient_sup = s.log_grad.iter().cloned().fold(0.0, f64::max);
    let log_gradient_sup_inner = s
        .log_grad
        .iter()
        .zip(&s.inner)
        .filter(|(_, &i)| i)
        .map(|(v, _)| *v)
        .fold(0.0, f64::max);
    let analytic_flag = log_gradient_sup <= GROWTH_LIMIT * log_gradient_sup_inner + 1e-9;
    let bounded_ratio = constant <= GROWTH_LIMIT * constant_inner;
    Ok(TamenessReport {
        radius,
        constant,
        constant_inner,
        log_gradient_sup,
        log_gradient_sup_inner,
        analytic_flag,
        verdict: analytic_flag && bounded_ratio,
        samples: s.m.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub tame: TamenessReport,
    /// `|grad phi|` strictly increases along every sampled ray at `s, 2s, 4s`.
    pub divergence: bool,
    /// Minimum over rays of `|grad phi(4s w)| / |grad phi(s w)|`.
    pub divergence_growth: f64,
    /// Max over the shell `s <= |x| <= 2s` of `|Hess phi| / |grad phi|^2`.
    pub hessian_ratio_tail: f64,
    /// Min over the shell of `d_r phi / |grad phi|`.
    pub radial_ratio_floor: f64,
    pub shell_radius: f64,
    pub hessian_threshold: f64,
    pub radial_threshold: f64,
    pub verdict: bool,
}

fn rays(d: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for j in 0..d {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[j] = s;
            out.push(v);
        }
    }
    if d > 1 && d <= 4 {
        let scale = 1.0 / (d as f64).sqrt();
        for mask in 0..(1usize << d) {
            out.push(
                (0..d)
                    .map(|j| if (mask >> j) & 1 == 1 { -scale } else { scale })
                    .collect(),
            );
        }
    }
    out
}

fn shell_points(d: usize, s: f64) -> Result<Vec<Vec<f64>>> {
    let per_axis = match d {
        1 => 401,
        2 => 61,
        3 => 21,
        _ => 7,
    };
    let outer = BoxRegion::centered(d, 2.0 * s)?;
    let lat = Lattice::over(&outer, 4.0 * s / (per_axis - 1) as f64)?;
    let mut pts: Vec<Vec<f64>> = (0..lat.len())
        .map(|id| lat.coords(id))
        .filter(|x| {
            let r = crate::region::norm(x);
            r >= s && r <= 2.0 * s
        })
        .collect();
    for ray in rays(d) {
        for t in [1.0, 1.5, 2.0] {
            pts.push(ray.iter().map(|w| w * t * s).collect());
        }
    }
    Ok(pts)
}

/// Finite-shell version of the admissibility conditions: tame gradient,
/// `|grad phi| -> inf`, vanishing `|Hess phi|/|grad phi|^2`, and a radial
/// derivative fraction bounded below.
pub fn check_admissible(
    spec: &WeightSpec,
    domain: &BoxRegion,
    shell_radius: f64,
) -> Result<AdmissibilityReport> {
    if !(shell_radius > spec.tau0()) {
        return input(format!(
            "shell radius {shell_radius} must exceed tau0 = {}",
            spec.tau0()
        ));
    }
    let d = spec.dimension;
    let per_axis = match d {
        1 => 201,
        2 => 41,
        3 => 13,
        _ => 5,
    };
    let tame = check_tame(spec, 1.0, domain, per_axis)?;

    let mut divergence = true;
    let mut divergence_growth = f64::INFINITY;
    for ray in rays(d) {
        let g: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|t| {
                let x: Vec<f64> = ray.iter().map(|w| w * t * shell_radius).collect();
                spec.gradient(&x).map(|g| crate::region::norm(&g))
            })
            .collect::<Result<_>>()?;
        let ok = g[0] > 0.0
            && g[1] > (1.0 + DIVERGENCE_STEP) * g[0]
            && g[2] > (1.0 + DIVERGENCE_STEP) * g[1];
        divergence &= ok;
        divergence_growth = divergence_growth.min(if g[0] > 0.0 { g[2] / g[0] } else { 1.0 });
    }

    let mut hessian_ratio_tail = 0.0f64;
    let mut radial_ratio_floor = f64::INFINITY;
    for x in shell_points(d, shell_radius)? {
        let g = crate::region::norm(&spec.gradient(&x)?);
        let hn = spec.hessian_norm(&x)?;
        let (hr, rr) = if g > 0.0 {
            (hn / (g * g), spec.radial_derivative(&x)? / g)
        } else {
            (f64::INFINITY, 0.0)
        };
        hessian_ratio_tail = hessian_ratio_tail.max(hr);
        radial_ratio_floor = radial_ratio_floor.min(rr);
    }

    let verdict = tame.verdict
        && divergence
        && hessian_ratio_tail < HESSIAN_RATIO_THRESHOLD
        && radial_ratio_floor > RADIAL_RATIO_THRESHOLD;
    Ok(AdmissibilityReport {
        tame,
        divergence,
        divergence_growth,
        hessian_ratio_tail,
        radial_ratio_floor,
        shell_radius,
        hessian_threshold: HESSIAN_RATIO_THRESHOLD,
        radial_threshold: RADIAL_RATIO_THRESHOLD,
        verdict,
    })
}
