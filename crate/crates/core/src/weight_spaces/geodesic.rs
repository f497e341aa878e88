//! Conformal distance `rho_phi` between two points by Dijkstra on a lattice.

use serde::{Deserialize, Serialize};

use super::spec::WeightSpec;
use crate::discrete_space::grid::GridGraph;
use crate::error::{input, Error, Result};
use crate::region::{euclidean, BoxRegion, Lattice};

/// Midpoint-rule cells per unit of Euclidean length for segment integrals.
const SEGMENT_CELLS_PER_UNIT: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `int_0^1 m(x + t (y - x)) |y - x| dt` by the midpoint rule.
pub fn segment_length(spec: &WeightSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let len = euclidean(x, y);
    if len == 0.0 {
        return Ok(0.0);
    }
    let cells = ((len * SEGMENT_CELLS_PER_UNIT).ceil() as usize).max(64);
    let mut acc = 0.0;
    let mut p = vec![0.0; x.len()];
    for i in 0..cells {
        let t = (i as f64 + 0.5) / cells as f64;
        for j in 0..x.len() {
            p[j] = x[j] + t * (y[j] - x[j]);
        }
        acc += spec.conformal_factor(&p)?;
    }
    Ok(acc * len / cells as f64)
}

/// Worst ratio between the stencil-graph length and the Euclidean length of
/// a straight move on a flat lattice.
pub fn stencil_anisotropy(d: usize) -> f64 {
    (1..=d)
        .map(|i| {
            let s = (i as f64).sqrt() - ((i - 1) as f64).sqrt();
            s * s
        })
        .sum::<f64>()
        .sqrt()
}

/// Bracketed estimate of `rho_phi(x, y)` on a lattice of spacing `resolution`.
///
/// The lattice covers every curve from `x` that is no longer than the
/// straight segment, since `m >= 1` bounds Euclidean length by `rho` length.
pub fn geodesic_distance(
    spec: &WeightSpec,
    x: &[f64],
    y: &[f64],
    resolution: f64,
) -> Result<GeodesicEstimate> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return input("resolution must be positive");
    }
    if x.len() != spec.dimension || y.len() != spec.dimension {
        return input("points must match the weight dimension");
    }
    let flat = euclidean(x, y);
    if flat == 0.0 {
        return Ok(GeodesicEstimate {
            estimate: 0.0,
            lower: 0.0,
            upper: 0.0,
        });
    }
    let upper = segment_length(spec, x, y)?;
    let steps = (upper / resolution).ceil() + 1.0;
    let reach = steps * resolution;
    let bx = BoxRegion::new(
        x.iter().map(|v| v - reach).collect(),
        x.iter().map(|v| v + reach + 0.5 * resolution).collect(),
    )?;
    let lattice = Lattice::over(&bx, resolution)?;
    let graph = GridGraph::build(spec, &bx, resolution)?;
    let src = lattice.nearest(x);
    let dst = lattice.nearest(y);
    if src == dst {
        return Err(Error::Resolution(format!(
            "points at distance {flat:e} share a lattice node at spacing {resolution:e}"
        )));
    }
    let snapped = lattice.coords(dst);
    let snap = segment_length(spec, y, &snapped)?;
    let dist = graph.shortest_paths(src, f64::INFINITY);
    let g = dist[dst];
    if !g.is_finite() {
        return Err(Error::Resolution(
            "lattice does not connect the points".into(),
        ));
    }
    let estimate = (g + snap).min(upper);
    let discrete_lower = g / (stencil_anisotropy(spec.dimension) * graph.max_edge_ratio) - snap;
    let lower = flat.max(discrete_lower).min(estimate);
    Ok(GeodesicEstimate {
        estimate,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_spaces::admissible::check_tame;

    #[test]
    fn anisotropy_constants() {
        assert_eq!(stencil_anisotropy(1), 1.0);
        assert!((stencil_anisotropy(2) - (4.0 - 2.0 * 2f64.sqrt()).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn flat_metric_is_euclidean_up_to_anisotropy() {
        let spec = WeightSpec::constant(2);
        for (x, y) in [
            ([0.0, 0.0], [1.0, 0.0]),
            ([0.0, 0.0], [0.7, 0.3]),
            ([0.1, -0.2], [-0.6, 0.9]),
        ] {
            let r = geodesic_distance(&spec, &x, &y, 0.01).unwrap();
            let e = euclidean(&x, &y);
            assert!(r.estimate >= e * (1.0 - 1e-12));
            assert!(r.estimate <= stencil_anisotropy(2) * e + 0.02);
            assert!(r.lower <= r.estimate && r.estimate <= r.upper + 1e-12);
        }
    }

    #[test]
    fn quadratic_weight_on_the_line_gives_two() {
        // rho(0, 1) = int_0^1 (1 + 2t) dt = 2
        let spec = WeightSpec::power(2.0, 1).unwrap();
        let mut last = f64::INFINITY;
        for h in [0.1, 0.01, 0.001] {
            let r = geodesic_distance(&spec, &[0.0], &[1.0], h).unwrap();
            assert!((r.estimate - 2.0).abs() <= (last - 2.0).abs() + 1e-12);
            assert!(r.lower <= 2.0 + 1e-9 && r.upper >= 2.0 - 1e-6);
            last = r.estimate;
        }
        assert!((last - 2.0).abs() < 0.01 * 2.0);
    }

    #[test]
    fn symmetric_in_the_endpoints_on_lattice_points() {
        let spec = WeightSpec::power(2.0, 2).unwrap();
        let a = geodesic_distance(&spec, &[0.0, 0.0], &[0.5, 0.25], 0.05).unwrap();
        let b = geodesic_distance(&spec, &[0.5, 0.25], &[0.0, 0.0], 0.05).unwrap();
        assert!((a.estimate - b.estimate).abs() < 1e-9);
    }

    #[test]
    fn comparable_to_m_times_euclidean_for_tame_weight() {
        let spec = WeightSpec::power(2.0, 2).unwrap();
        let c = check_tame(&spec, 1.0, &BoxRegion::centered(2, 3.0).unwrap(), 61)
            .unwrap()
            .constant;
        for (x, y) in [
            ([0.0, 0.0], [0.3, 0.1]),
            ([1.0, 1.0], [1.1, 0.9]),
            ([-2.0, 0.5], [-2.1, 0.45]),
        ] {
            let r = geodesic_distance(&spec, &x, &y, 0.005).unwrap();
            let base = spec.conformal_factor(&x).unwrap() * euclidean(&x, &y);
            assert!(r.estimate < 1.0);
            assert!(
                r.estimate >= base / c && r.estimate <= base * c,
                "{r:?} {base} {c}"
            );
        }
    }

    #[test]
    fn coincident_snaps_are_a_resolution_error() {
        let spec = WeightSpec::constant(1);
        assert!(matches!(
            geodesic_distance(&spec, &[0.0], &[0.001], 0.1),
            Err(Error::Resolution(_))
        ));
    }
}
