//! Standard and exceptional atoms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::balls::BallFamily;
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

/// Relative tolerance of the mean and size invariants.
pub const ATOM_TOLERANCE: f64 = 1e-12;

/// Serializes an exponent in `(1, inf]`, writing infinity as `"inf"`.
pub(crate) mod exponent {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(f64),
        Named(String),
    }

    pub fn serialize<S: Serializer>(r: &f64, s: S) -> Result<S::Ok, S::Error> {
        if r.is_infinite() {
            Repr::Named("inf".into()).serialize(s)
        } else {
            Repr::Finite(*r).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Finite(v) => Ok(v),
            Repr::Named(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Named(s) => Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Atom {
    /// Supported in the closed ball `B(center, radius)`; `values` pairs with
    /// the ascending `support`.
    Standard {
        center: usize,
        radius: f64,
        support: Vec<usize>,
        values: Vec<f64>,
    },
    /// The constant `1 / mu(M)`.
    Exceptional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCheck {
    /// `int a dmu`.
    pub mean: f64,
    /// `(mu(B)^{-1} int |a|^r)^{1/r}`, or `||a||_inf` when `r = inf`.
    pub size: f64,
    /// `mu(B)^{-1}`.
    pub size_bound: f64,
    pub l1: f64,
    pub support_in_ball: bool,
    pub radius_ok: bool,
    pub passes: bool,
}

/// `(int |h|^r dmu)^{1/r}` over the listed points.
pub(crate) fn sparse_norm(
    space: &FiniteMetricMeasureSpace,
    support: &[usize],
    values: &[f64],
    r: f64,
) -> f64 {
    if r.is_infinite() {
        return values.iter().fold(0.0, |a, v| a.max(v.abs()));
    }
    support
        .iter()
        .zip(values)
        .map(|(&x, v)| v.abs().powf(r) * space.mass(x))
        .sum::<f64>()
        .powf(1.0 / r)
}

impl Atom {
    /// Builds `h / lambda` for a mean-zero `h` supported near `center`, with
    /// the smallest closed ball around `center` holding the support and
    /// `lambda = ||h||_r mu(B)^{1 - 1/r}`, the least admissible coefficient.
    pub fn normalize(
        space: &FiniteMetricMeasureSpace,
        center: usize,
        support: Vec<usize>,
        values: Vec<f64>,
        r: f64,
    ) -> Option<(f64, Atom)> {
        let norm = sparse_norm(space, &support, &values, r);
        if norm == 0.0 || support.is_empty() {
            return None;
        }
        let radius = support
            .iter()
            .map(|&x| space.dist(center, x))
            .fold(0.0, f64::max);
        let mass = space.ball_mass(center, radius);
        let lambda = if r.is_infinite() {
            norm * mass
        } else {
            norm * mass.powf(1.0 - 1.0 / r)
        };
        let values = values.iter().map(|v| v / lambda).collect();
        Some((
            lambda,
            Atom::Standard {
                center,
                radius,
                support,
                values,
            },
        ))
    }

    /// Adds `coefficient * a` into `out`.
    pub fn accumulate(&self, space: &FiniteMetricMeasureSpace, coefficient: f64, out: &mut [f64]) {
        match self {
            Atom::Standard {
                support, values, ..
            } => {
                for (&x, v) in support.iter().zip(values) {
                    out[x] += coefficient * v;
                }
            }
            Atom::Exceptional => {
                let v = coefficient / space.total_mass();
                out.iter_mut().for_each(|o| *o += v);
            }
        }
    }

    /// `int f a dmu`.
    pub fn pair(&self, space: &FiniteMetricMeasureSpace, f: &[f64]) -> f64 {
        match self {
            Atom::Standard {
                support, values, ..
            } => support
                .iter()
                .zip(values)
                .map(|(&x, v)| f[x] * v * space.mass(x))
                .sum(),
            Atom::Exceptional => space.integrate(f) / space.total_mass(),
        }
    }

    pub fn check(&self, space: &FiniteMetricMeasureSpace, b: f64, r: f64) -> AtomCheck {
        match self {
            Atom::Exceptional => AtomCheck {
                mean: 1.0,
                size: 1.0 / space.total_mass(),
                size_bound: 1.0 / space.total_mass(),
                l1: 1.0,
                support_in_ball: true,
                radius_ok: true,
                passes: true,
            },
            Atom::Standard {
                center,
                radius,
                support,
                values,
            } => {
                let mass = space.ball_mass(*center, *radius);
                let mean: f64 = support
                    .iter()
                    .zip(values)
                    .map(|(&x, v)| v * space.mass(x))
                    .sum();
                let l1 = sparse_norm(space, support, values, 1.0);
                let size = if r.is_infinite() {
                    sparse_norm(space, support, values, r)
                } else {
                    (sparse_norm(space, support, values, r).powf(r) / mass).powf(1.0 / r)
                };
                let size_bound = 1.0 / mass;
                let support_in_ball = support.iter().all(|&x| space.dist(*center, x) <= *radius);
                let radius_ok = *radius <= b;
                let passes = support_in_ball
                    && radius_ok
                    && mean.abs() <= ATOM_TOLERANCE * l1.max(f64::MIN_POSITIVE)
                    && size <= size_bound * (1.0 + ATOM_TOLERANCE);
                AtomCheck {
                    mean,
                    size,
                    size_bound,
                    l1,
                    support_in_ball,
                    radius_ok,
                    passes,
                }
            }
        }
    }
}

/// A random `(1, r)`-atom on a random ball of the family with at least two
/// points.
pub fn random_atom<R: Rng>(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    r: f64,
    rng: &mut R,
) -> Result<Atom> {
    let usable: Vec<usize> = (0..fam.n_centers())
        .filter(|&c| fam.order(c).len() >= 2)
        .collect();
    if usable.is_empty() {
        return input("no ball of the family holds two points");
    }
    loop {
        let c = usable[rng.gen_range(0..usable.len())];
        let balls: Vec<_> = fam.balls_at(c).filter(|b| b.len >= 2).collect();
        let ball = balls[rng.gen_range(0..balls.len())];
        let mut support: Vec<usize> = fam.members(&ball).iter().map(|&x| x as usize).collect();
        support.sort_unstable();
        let raw: Vec<f64> = support.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let w: f64 = support.iter().map(|&x| space.mass(x)).sum();
        let mean = support
            .iter()
            .zip(&raw)
            .map(|(&x, v)| v * space.mass(x))
            .sum::<f64>()
            / w;
        let values = raw.iter().map(|v| v - mean).collect();
        if let Some((_, atom)) = Atom::normalize(space, c, support, values, r) {
            return Ok(atom);
        }
    }
}
