//! Enumeration of the admissible ball family on a finite space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

/// One closed ball `B(center, radius)` of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallRef {
    pub center: usize,
    pub radius: f64,
    /// Number of points, i.e. the prefix length of the center's order.
    pub len: usize,
}

#[derive(Debug, Clone)]
struct CenterBalls {
    /// Points within `b` sorted by `(distance, id)`.
    order: Vec<u32>,
    /// Distinct radii with the prefix length of each ball.
    radii: Vec<f64>,
    cuts: Vec<u32>,
}

/// Every closed ball `B(c, r)` with `c` a point and `r <= b` one of the
/// distinct distances from `c`. On a finite space these realize all balls of
/// radius at most `b`.
#[derive(Debug, Clone)]
pub struct BallFamily {
    pub b: f64,
    centers: Vec<CenterBalls>,
}

impl BallFamily {
    pub fn new(space: &FiniteMetricMeasureSpace, b: f64) -> Result<Self> {
        if !(b >= 0.0) {
            return input("ball scale must be nonnegative");
        }
        if space.is_empty() {
            return input("empty space has no balls");
        }
        let centers = (0..space.len())
            .into_par_iter()
            .map(|c| {
                let row = space.row(c);
                let mut order: Vec<u32> = (0..space.len() as u32)
                    .filter(|&y| row[y as usize] <= b)
                    .collect();
                order.sort_by(|&x, &y| row[x as usize].total_cmp(&row[y as usize]).then(x.cmp(&y)));
                let mut radii = vec![];
                let mut cuts = vec![];
                for (i, &y) in order.iter().enumerate() {
                    let d = row[y as usize];
                    if order.get(i + 1).is_none_or(|&n| row[n as usize] > d) {
                        radii.push(d);
                        cuts.push(i as u32 + 1);
                    }
                }
                CenterBalls { order, radii, cuts }
            })
            .collect();
        Ok(BallFamily { b, centers })
    }

    pub fn n_centers(&self) -> usize {
        self.centers.len()
    }

    /// Total number of balls.
    pub fn len(&self) -> usize {
        self.centers.iter().map(|c| c.cuts.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points within `b` of `c`, nearest first.
    pub fn order(&self, c: usize) -> &[u32] {
        &self.centers[c].order
    }

    pub fn balls_at(&self, c: usize) -> impl Iterator<Item = BallRef> + '_ {
        let cb = &self.centers[c];
        cb.radii
            .iter()
            .zip(&cb.cuts)
            .map(move |(&radius, &len)| BallRef {
                center: c,
                radius,
                len: len as usize,
            })
    }

    pub fn count_at(&self, c: usize) -> usize {
        self.centers[c].cuts.len()
    }

    pub fn members(&self, ball: &BallRef) -> &[u32] {
        &self.centers[ball.center].order[..ball.len]
    }

    /// Smallest ball of the family centered at `c` with radius `>= r`.
    pub fn ball_covering(&self, c: usize, r: f64) -> Option<BallRef> {
        let cb = &self.centers[c];
        let k = cb.radii.partition_point(|&x| x < r);
        (k < cb.radii.len()).then(|| BallRef {
            center: c,
            radius: cb.radii[k],
            len: cb.cuts[k] as usize,
        })
    }
}
