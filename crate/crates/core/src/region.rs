//! Axis-aligned boxes and Euclidean balls in R^d.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let b = BoxRegion { lo, hi };
        b.validate()?;
        Ok(b)
    }

    /// The cube `[-half, half]^d`.
    pub fn centered(d: usize, half: f64) -> Result<Self> {
        Self::new(vec![-half; d], vec![half; d])
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_empty() || self.lo.len() != self.hi.len() {
            return input("box bounds must be nonempty and of equal dimension");
        }
        for (l, h) in self.lo.iter().zip(&self.hi) {
            if !(l.is_finite() && h.is_finite() && h > l) {
                return input(format!("degenerate box side [{l}, {h}]"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    /// Same center, sides scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> BoxRegion {
        let lo = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h) - 0.5 * factor * (h - l))
            .collect();
        let hi = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h) + 0.5 * factor * (h - l))
            .collect();
        BoxRegion { lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl EuclideanBall {
    pub fn contains(&self, x: &[f64]) -> bool {
        euclidean(&self.center, x) <= self.radius
    }
}

/// A bounded integration region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Box(BoxRegion),
    Ball(EuclideanBall),
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Box(b) => b.dim(),
            Region::Ball(b) => b.center.len(),
        }
    }

    pub fn bounding_box(&self) -> Result<BoxRegion> {
        match self {
            Region::Box(b) => {
                b.validate()?;
                Ok(b.clone())
            }
            Region::Ball(b) => {
                if !(b.radius > 0.0 && b.radius.is_finite()) {
                    return input("ball radius must be positive and finite");
                }
                BoxRegion::new(
                    b.center.iter().map(|c| c - b.radius).collect(),
                    b.center.iter().map(|c| c + b.radius).collect(),
                )
            }
        }
    }
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Uniform grid over a box: `n_axis[i]` nodes along axis `i`, spacing `h`
/// anchored at `lo`. The last node on each axis is the largest `lo + k h`
/// not exceeding `hi` (up to a relative slack of 1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub lo: Vec<f64>,
    pub h: f64,
    pub n_axis: Vec<usize>,
}

impl Lattice {
    pub fn over(bx: &BoxRegion, h: f64) -> Result<Self> {
        bx.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return input("grid spacing must be positive");
        }
        let n_axis = bx
            .lo
            .iter()
            .zip(&bx.hi)
            .map(|(l, hi)| ((hi - l) / h + 1e-9).floor() as usize + 1)
            .collect();
        Ok(Lattice {
            lo: bx.lo.clone(),
            h,
            n_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.n_axis.len()
    }

    pub fn len(&self) -> usize {
        self.n_axis.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of node `id`; axis 0 varies fastest.
    pub fn index_of(&self, mut id: usize) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for &n in &self.n_axis {
            idx.push(id % n);
            id /= n;
        }
        idx
    }

    pub fn id_of(&self, idx: &[usize]) -> usize {
        let mut id = 0;
        let mut stride = 1;
        for (i, &n) in idx.iter().zip(&self.n_axis) {
            id += i * stride;
            stride *= n;
        }
        id
    }

    pub fn coords(&self, id: usize) -> Vec<f64> {
        self.index_of(id)
            .iter()
            .zip(&self.lo)
            .map(|(&i, l)| l + i as f64 * self.h)
            .collect()
    }

    /// Nearest node to `x`, clamped into the lattice.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let idx: Vec<usize> = x
            .iter()
            .zip(&self.lo)
            .zip(&self.n_axis)
            .map(|((v, l), &n)| {
                let k = ((v - l) / self.h).round();
                k.clamp(0.0, (n - 1) as f64) as usize
            })
            .collect();
        self.id_of(&idx)
    }
}
