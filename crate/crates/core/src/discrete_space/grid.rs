//! Lattice graphs with the full `3^d - 1` neighbour stencil and edge
//! weights `|u - v| (m(u) + m(v)) / 2`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{input, Result};
use crate::region::{BoxRegion, Lattice};
use crate::weight_spaces::WeightSpec;

#[derive(Debug, Clone)]
pub struct GridGraph {
    pub lattice: Lattice,
    /// Conformal factor at each node.
    pub m: Vec<f64>,
    row_start: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    /// Largest edge weight.
    pub max_edge_weight: f64,
    /// Largest `m(u)/m(v)` over edges.
    pub max_edge_ratio: f64,
}

/// Entry of the Dijkstra frontier, ordered so the heap pops the smallest
/// distance first and, among equal distances, the smallest node.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Neighbour offsets of the full stencil with their Euclidean lengths in
/// units of the spacing.
fn stencil(d: usize) -> Vec<(Vec<i64>, f64)> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|o| {
                (-1..=1).map(move |k| {
                    let mut v = o.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out.into_iter()
        .filter(|o| o.iter().any(|&k| k != 0))
        .map(|o| {
            let len = (o.iter().map(|k| (k * k) as f64).sum::<f64>()).sqrt();
            (o, len)
        })
        .collect()
}

impl GridGraph {
    pub fn build(spec: &WeightSpec, bx: &BoxRegion, h: f64) -> Result<Self> {
        if bx.dim() != spec.dimension {
            return input("box dimension differs from the weight dimension");
        }
        let lattice = Lattice::over(bx, h)?;
        let m = (0..lattice.len())
            .into_par_iter()
            .map(|id| spec.conformal_factor(&lattice.coords(id)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self::from_factors(lattice, m))
    }

    /// Graph over `lattice` with a prescribed conformal factor per node.
    pub fn from_factors(lattice: Lattice, m: Vec<f64>) -> Self {
        assert_eq!(m.len(), lattice.len());
        let d = lattice.dim();
        let st = stencil(d);
        let n = lattice.len();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(n * st.len());
        let mut weights = Vec::with_capacity(n * st.len());
        let mut max_edge_weight = 0.0f64;
        let mut max_edge_ratio = 1.0f64;
        let mut nb = vec![0usize; d];
        for id in 0..n {
            row_start.push(targets.len());
            let idx = lattice.index_of(id);
            'offsets: for (off, len) in &st {
                for j in 0..d {
                    let v = idx[j] as i64 + off[j];
                    if v < 0 || v >= lattice.n_axis[j] as i64 {
                        continue 'offsets;
                    }
                    nb[j] = v as usize;
                }
                let other = lattice.id_of(&nb);
                let w = len * lattice.h * (m[id] + m[other]) * 0.5;
                targets.push(other as u32);
                weights.push(w);
                max_edge_weight = max_edge_weight.max(w);
                max_edge_ratio = max_edge_ratio.max(m[id] / m[other]);
            }
        }
        row_start.push(targets.len());
        GridGraph {
            lattice,
            m,
            row_start,
            targets,
            weights,
            max_edge_weight,
            max_edge_ratio,
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn neighbors(&self, id: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_start[id]..self.row_start[id + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&t, &w)| (t as usize, w))
    }

    /// Single-source shortest paths; nodes farther than `cutoff` are left at
    /// infinity.
    pub fn shortest_paths(&self, source: usize, cutoff: f64) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.len()];
        let mut done = vec![false; self.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Frontier {
            dist: 0.0,
            node: source,
        });
        while let Some(Frontier { dist: du, node: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for (v, w) in self.neighbors(u) {
                let cand = du + w;
                if cand < dist[v] && cand <= cutoff {
                    dist[v] = cand;
                    heap.push(Frontier {
                        dist: cand,
                        node: v,
                    });
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_sizes() {
        assert_eq!(stencil(1).len(), 2);
        assert_eq!(stencil(2).len(), 8);
        assert_eq!(stencil(3).len(), 26);
    }

    #[test]
    fn flat_grid_distances_are_octile() {
        let bx = BoxRegion::centered(2, 1.0).unwrap();
        let g = GridGraph::build(&WeightSpec::constant(2), &bx, 0.5).unwrap();
        assert_eq!(g.len(), 25);
        let src = g.lattice.nearest(&[-1.0, -1.0]);
        let d = g.shortest_paths(src, f64::INFINITY);
        let corner = g.lattice.nearest(&[1.0, 1.0]);
        assert!((d[corner] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let knight = g.lattice.nearest(&[1.0, -0.5]);
        // one diagonal step plus three axis steps
        assert!((d[knight] - (0.5 * 2f64.sqrt() + 1.5)).abs() < 1e-12);
    }

    #[test]
    fn cutoff_truncates() {
        let bx = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        let g = GridGraph::build(&WeightSpec::constant(1), &bx, 0.1).unwrap();
        let d = g.shortest_paths(0, 0.35);
        assert!(d[3].is_finite() && d[4].is_infinite());
    }

    #[test]
    fn edge_weights_are_symmetric() {
        let bx = BoxRegion::centered(2, 1.0).unwrap();
        let g = GridGraph::build(&WeightSpec::power(3.0, 2).unwrap(), &bx, 0.25).unwrap();
        for u in 0..g.len() {
            for (v, w) in g.neighbors(u) {
                let back = g.neighbors(v).find(|(t, _)| *t == u).unwrap().1;
                assert_eq!(w.to_bits(), back.to_bits());
            }
        }
    }
}
