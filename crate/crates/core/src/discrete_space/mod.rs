//! Finite metric measure spaces: the substrate for cubes, balls and every
//! function-space computation.

pub mod discretize;
pub mod doubling;
pub mod grid;
pub mod io;
pub mod midpoint;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::region::BoxRegion;
use crate::weight_spaces::{Sign, WeightSpec};
use grid::GridGraph;

pub use discretize::{discretize, truncation_box, StoragePolicy, DENSE_LIMIT};
pub use doubling::{estimate_doubling, DoublingReport};
pub use midpoint::{verify_approximate_midpoint, MidpointReport};

/// Relative tolerance for metric axioms, scaled by the diameter.
pub const METRIC_TOLERANCE: f64 = 1e-9;

/// Largest space whose triangle inequality is audited on construction.
pub const AUDIT_LIMIT: usize = 500;

/// Scale `b`, midpoint ratio `beta` and midpoint threshold `R0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub b: f64,
    pub beta: f64,
    pub r0: f64,
}

impl GeometryParams {
    pub fn new(b: f64, beta: f64, r0: f64) -> Result<Self> {
        let p = GeometryParams { b, beta, r0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return input("scale b must be positive");
        }
        if !(self.beta > 0.5 && self.beta < 1.0) {
            return input("beta must lie in (1/2, 1)");
        }
        if !(self.r0 >= 0.0) {
            return input("R0 must be nonnegative");
        }
        Ok(())
    }

    /// `b > R0 / (1 - beta)`, the admissibility of the ball family.
    pub fn admissible_scale(&self) -> bool {
        self.b > self.r0 / (1.0 - self.beta)
    }

    pub fn require_admissible_scale(&self) -> Result<()> {
        self.validate()?;
        if !self.admissible_scale() {
            return input(format!(
                "scale b = {} must exceed R0/(1-beta) = {}",
                self.b,
                self.r0 / (1.0 - self.beta)
            ));
        }
        Ok(())
    }

    pub fn with_b(&self, b: f64) -> Self {
        GeometryParams { b, ..*self }
    }
}

/// How a discretized space was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSource {
    pub spec: WeightSpec,
    pub sign: Sign,
    pub domain: BoxRegion,
    pub h: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceMetadata {
    pub source: Option<SpaceSource>,
    /// Longest grid edge, the resolution of the metric.
    pub max_edge_length: f64,
    /// Estimated fraction of the full mass lying outside the box.
    pub tail_mass_fraction: Option<f64>,
}

/// Lower triangle (diagonal included) of a symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSymmetric {
    n: usize,
    data: Vec<f64>,
}

impl PackedSymmetric {
    pub fn zeros(n: usize) -> Self {
        PackedSymmetric {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn from_data(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * (n + 1) / 2 {
            return input("packed distance array has the wrong length");
        }
        Ok(PackedSymmetric { n, data })
    }

    #[inline]
    fn offset(i: usize, j: usize) -> usize {
        let (a, b) = if i >= j { (i, j) } else { (j, i) };
        a * (a + 1) / 2 + b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[Self::offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[Self::offset(i, j)] = v;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mutable lower-triangle row `i` (entries `j <= i`).
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let s = i * (i + 1) / 2;
        &mut self.data[s..s + i + 1]
    }
}

/// Per-source Dijkstra rows computed on first use.
#[derive(Debug)]
pub struct LazyDistances {
    graph: Arc<GridGraph>,
    rows: Vec<OnceLock<Vec<f64>>>,
}

impl LazyDistances {
    pub fn new(graph: Arc<GridGraph>) -> Self {
        let rows = (0..graph.len()).map(|_| OnceLock::new()).collect();
        LazyDistances { graph, rows }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows[i].get_or_init(|| self.graph.shortest_paths(i, f64::INFINITY))
    }

    pub fn cached_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.get().is_some()).count()
    }
}

#[derive(Debug)]
pub enum DistanceStore {
    Dense(PackedSymmetric),
    Lazy(LazyDistances),
}

#[derive(Debug)]
pub struct FiniteMetricMeasureSpace {
    coords: Option<Vec<Vec<f64>>>,
    masses: Vec<f64>,
    total_mass: f64,
    store: DistanceStore,
    pub metadata: SpaceMetadata,
}

impl FiniteMetricMeasureSpace {
    /// Validates masses and distances; the cubic triangle-inequality audit
    /// runs only up to [`AUDIT_LIMIT`] points.
    pub fn from_packed(
        coords: Option<Vec<Vec<f64>>>,
        dist: PackedSymmetric,
        masses: Vec<f64>,
    ) -> Result<Self> {
        let space = Self::from_parts(
            coords,
            DistanceStore::Dense(dist),
            masses,
            SpaceMetadata::default(),
        )?;
        space.audit_metric()?;
        Ok(space)
    }

    /// Builds from a full square matrix, which must be symmetric.
    pub fn from_matrix(
        coords: Option<Vec<Vec<f64>>>,
        dist: &[Vec<f64>],
        masses: Vec<f64>,
    ) -> Result<Self> {
        let n = dist.len();
        let mut packed = PackedSymmetric::zeros(n);
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return input("distance matrix must be square");
            }
            for j in 0..=i {
                if row[j] != dist[j][i] {
                    return input(format!("distance matrix not symmetric at ({i}, {j})"));
                }
                packed.set(i, j, row[j]);
            }
        }
        Self::from_packed(coords, packed, masses)
    }

    /// Euclidean distances between the given points.
    pub fn euclidean(points: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        let n = points.len();
        let mut packed = PackedSymmetric::zeros(n);
        for i in 0..n {
            for j in 0..i {
                packed.set(i, j, crate::region::euclidean(&points[i], &points[j]));
            }
        }
        Self::from_parts(
            Some(points),
            DistanceStore::Dense(packed),
            masses,
            SpaceMetadata::default(),
        )
    }

    pub(crate) fn from_parts(
        coords: Option<Vec<Vec<f64>>>,
        store: DistanceStore,
        masses: Vec<f64>,
        metadata: SpaceMetadata,
    ) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return input("a space needs at least one point");
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return input("coordinate count differs from mass count");
            }
        }
        match &store {
            DistanceStore::Dense(p) if p.len() != n => {
                return input("distance matrix size differs from mass count")
            }
            DistanceStore::Lazy(l) if l.graph.len() != n => {
                return input("graph size differs from mass count")
            }
            _ => {}
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return input("masses must be positive and finite");
        }
        let total_mass = masses.iter().sum();
        Ok(FiniteMetricMeasureSpace {
            coords,
            masses,
            total_mass,
            store,
            metadata,
        })
    }

    fn audit_metric(&self) -> Result<()> {
        let n = self.len();
        let scale = self.diameter().max(f64::MIN_POSITIVE);
        for i in 0..n {
            if self.dist(i, i) != 0.0 {
                return input(format!("dist({i},{i}) is not zero"));
            }
            for j in 0..i {
                let d = self.dist(i, j);
                if !(d > 0.0 && d.is_finite()) {
                    return input(format!("dist({i},{j}) = {d} must be positive and finite"));
                }
            }
        }
        if n > AUDIT_LIMIT {
            return Ok(());
        }
        if let Some((i, j, k)) = self.triangle_violation(METRIC_TOLERANCE * scale) {
            return input(format!("triangle inequality fails for ({i}, {j}, {k})"));
        }
        Ok(())
    }

    /// First triple with `d(i,j) > d(i,k) + d(k,j) + tol`, if any.
    pub fn triangle_violation(&self, tol: f64) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in 0..i {
                let dij = self.dist(i, j);
                for k in 0..n {
                    if dij > self.dist(i, k) + self.dist(k, j) + tol {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn store(&self) -> &DistanceStore {
        &self.store
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.store, DistanceStore::Dense(_))
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.store {
            DistanceStore::Dense(p) => p.get(i, j),
            DistanceStore::Lazy(l) => {
                // the larger index is the source, as in dense storage
                let (a, b) = if i >= j { (i, j) } else { (j, i) };
                l.row(a)[b]
            }
        }
    }

    /// Distances from `i` to every point.
    pub fn row(&self, i: usize) -> Vec<f64> {
        match &self.store {
            DistanceStore::Dense(p) => (0..self.len()).map(|j| p.get(i, j)).collect(),
            DistanceStore::Lazy(_) => (0..self.len()).map(|j| self.dist(i, j)).collect(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.store {
            DistanceStore::Dense(p) => p.data().iter().cloned().fold(0.0, f64::max),
            DistanceStore::Lazy(_) => {
                let mut best = 0.0f64;
                for i in 0..self.len() {
                    for j in 0..i {
                        best = best.max(self.dist(i, j));
                    }
                }
                best
            }
        }
    }

    /// Smallest distance between distinct points (infinity for one point).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..i {
                best = best.min(self.dist(i, j));
            }
        }
        best
    }

    /// Closed ball `{y : d(c, y) <= r}` as ascending ids.
    pub fn ball(&self, c: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.dist(c, y) <= r).collect()
    }

    pub fn ball_mass(&self, c: usize, r: f64) -> f64 {
        (0..self.len())
            .filter(|&y| self.dist(c, y) <= r)
            .map(|y| self.masses[y])
            .sum()
    }

    pub fn set_mass(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.masses[i]).sum()
    }

    /// `min_{y in set} d(x, y)`; infinity for an empty set.
    pub fn dist_to_set(&self, x: usize, set: &[usize]) -> f64 {
        set.iter()
            .map(|&y| self.dist(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    /// `int f dmu`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.masses).map(|(v, m)| v * m).sum()
    }

    /// `||f||_p`; `p = inf` gives the sup norm.
    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return f.iter().fold(0.0, |a, v| a.max(v.abs()));
        }
        if p == 1.0 {
            return f.iter().zip(&self.masses).map(|(v, m)| v.abs() * m).sum();
        }
        f.iter()
            .zip(&self.masses)
            .map(|(v, m)| v.abs().powf(p) * m)
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Copies the distances into a packed matrix (forces every lazy row).
    pub fn to_packed(&self) -> PackedSymmetric {
        match &self.store {
            DistanceStore::Dense(p) => p.clone(),
            DistanceStore::Lazy(_) => {
                let n = self.len();
                let mut p = PackedSymmetric::zeros(n);
                for i in 0..n {
                    for j in 0..i {
                        p.set(i, j, self.dist(i, j));
                    }
                }
                p
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indexing_is_symmetric() {
        let mut p = PackedSymmetric::zeros(4);
        p.set(3, 1, 2.5);
        assert_eq!(p.get(1, 3), 2.5);
        assert_eq!(p.data().len(), 10);
    }

    #[test]
    fn rejects_bad_metrics() {
        let m = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        assert!(FiniteMetricMeasureSpace::from_matrix(None, &m, vec![1.0; 3]).is_err());
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(FiniteMetricMeasureSpace::from_matrix(None, &asym, vec![1.0; 2]).is_err());
        let ok = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(FiniteMetricMeasureSpace::from_matrix(None, &ok, vec![1.0, 0.0]).is_err());
        let s = FiniteMetricMeasureSpace::from_matrix(None, &ok, vec![1.0, 2.0]).unwrap();
        assert_eq!(s.total_mass(), 3.0);
    }

    #[test]
    fn closed_balls() {
        let s = FiniteMetricMeasureSpace::euclidean(
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![1.0; 3],
        )
        .unwrap();
        assert_eq!(s.ball(0, 0.5), vec![0, 1]);
        assert_eq!(s.ball(1, 0.49), vec![1]);
        assert_eq!(s.ball_mass(1, 0.5), 3.0);
        assert_eq!(s.diameter(), 1.0);
        assert_eq!(s.min_separation(), 0.5);
    }

    #[test]
    fn scale_admissibility() {
        let p = GeometryParams::new(1.0, 0.75, 0.2).unwrap();
        assert!(p.admissible_scale());
        assert!(!p.with_b(0.8).admissible_scale());
        assert!(GeometryParams::new(1.0, 0.5, 0.0).is_err());
    }
}
