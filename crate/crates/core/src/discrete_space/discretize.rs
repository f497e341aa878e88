//! Lattice discretization of `(R^d, rho_phi, mu_{+-phi})`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridGraph;
use super::{
    DistanceStore, FiniteMetricMeasureSpace, LazyDistances, PackedSymmetric, SpaceMetadata,
    SpaceSource,
};
use crate::error::{input, Error, Result};
use crate::region::{BoxRegion, Region};
use crate::weight_spaces::{weighted_mass, Sign, WeightSpec};

/// Largest point count stored as a dense distance matrix.
pub const DENSE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoragePolicy {
    /// Dense up to [`DENSE_LIMIT`] points, lazy beyond.
    #[default]
    Auto,
    Dense,
    Lazy,
}

/// Grid nodes of `bx` at spacing `h`, with graph-geodesic distances and
/// masses `e^{+-phi(x_i)} h^d`.
pub fn discretize(
    spec: &WeightSpec,
    sign: Sign,
    bx: &BoxRegion,
    h: f64,
    storage: StoragePolicy,
) -> Result<FiniteMetricMeasureSpace> {
    spec.validate()?;
    let graph = GridGraph::build(spec, bx, h)?;
    let n = graph.len();
    let dense = match storage {
        StoragePolicy::Dense if n > DENSE_LIMIT => {
            return Err(Error::Capacity {
                points: n,
                limit: DENSE_LIMIT,
            })
        }
        StoragePolicy::Dense => true,
        StoragePolicy::Lazy => false,
        StoragePolicy::Auto => n <= DENSE_LIMIT,
    };
    let coords: Vec<Vec<f64>> = (0..n).map(|i| graph.lattice.coords(i)).collect();
    let vol = h.powi(spec.dimension as i32);
    let masses = coords
        .par_iter()
        .map(|x| spec.density(sign, x).map(|v| v * vol))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(i) = masses.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::Evaluation {
            point: coords[i].clone(),
            reason: format!("point mass {} is not positive and finite", masses[i]),
        });
    }
    let tail_mass_fraction = match sign {
        Sign::Minus => Some(tail_fraction(spec, bx, h)?),
        Sign::Plus => None,
    };
    let metadata = SpaceMetadata {
        source: Some(SpaceSource {
            spec: spec.clone(),
            sign,
            domain: bx.clone(),
            h,
        }),
        max_edge_length: graph.max_edge_weight,
        tail_mass_fraction,
    };
    let graph = Arc::new(graph);
    let store = if dense {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = graph.shortest_paths(i, f64::INFINITY);
                row.truncate(i + 1);
                row
            })
            .collect();
        let mut packed = PackedSymmetric::zeros(n);
        for (i, row) in rows.into_iter().enumerate() {
            packed.row_mut(i).copy_from_slice(&row);
        }
        DistanceStore::Dense(packed)
    } else {
        DistanceStore::Lazy(LazyDistances::new(graph))
    };
    FiniteMetricMeasureSpace::from_parts(Some(coords), store, masses, metadata)
}

/// Fraction of `mu_{-phi}(R^d)` outside `bx`, estimated by comparing the
/// box mass with that of the box doubled about its center.
fn tail_fraction(spec: &WeightSpec, bx: &BoxRegion, h: f64) -> Result<f64> {
    let q = (h * 0.5).min(0.05);
    let inner = weighted_mass(spec, Sign::Minus, &Region::Box(bx.clone()), q)?;
    let outer = weighted_mass(spec, Sign::Minus, &Region::Box(bx.scaled(2.0)), q)?;
    if !(outer > 0.0) {
        return input("weight has no mass on the box");
    }
    Ok(((outer - inner) / outer).max(0.0))
}

/// Smallest box `[-L, L]^d`, `L` a multiple of `step`, whose discarded
/// `mu_{-phi}` tail is below `tolerance` of the total.
pub fn truncation_box(spec: &WeightSpec, tolerance: f64, step: f64) -> Result<BoxRegion> {
    if !(tolerance > 0.0 && tolerance < 1.0) || !(step > 0.0) {
        return input("tolerance must lie in (0, 1) and step be positive");
    }
    let mut half = step;
    for _ in 0..10_000 {
        let bx = BoxRegion::centered(spec.dimension, half)?;
        if tail_fraction(spec, &bx, step)? < tolerance {
            return Ok(bx);
        }
        half += step;
    }
    input("no box within 10^4 steps meets the tail tolerance")
}
