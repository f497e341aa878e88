//! Finite test families of sets avoiding the closed ball `B0`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::Ball;
use crate::christ_cubes::DyadicCubeTree;
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSet {
    pub name: String,
    /// Ascending point ids.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Annuli,
    Slabs,
    Cubes,
}

impl std::str::FromStr for FamilyKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annuli" => Ok(FamilyKind::Annuli),
            "slabs" => Ok(FamilyKind::Slabs),
            "cubes" => Ok(FamilyKind::Cubes),
            other => input(format!("unknown test family {other:?}")),
        }
    }
}

fn outside_b0(
    space: &FiniteMetricMeasureSpace,
    b0: &Ball,
    keep: impl Fn(usize) -> bool,
) -> Vec<usize> {
    (0..space.len())
        .filter(|&x| !b0.contains(space, x) && keep(x))
        .collect()
}

fn push_nonempty(out: &mut Vec<TestSet>, name: String, members: Vec<usize>, n: usize, b0: usize) {
    // the set must leave a nonempty complement; B0 is never inside, so only
    // emptiness needs a check
    if !members.is_empty() && members.len() + b0 <= n {
        out.push(TestSet { name, members });
    }
}

/// Metric annuli `{r1 < rho(c, x) <= r2}` around the center of `B0` with
/// `r1 >= r_B0`, for consecutive `steps` radii up to the eccentricity, plus
/// every outer tail `{rho(c, x) > r1}`.
pub fn annuli(space: &FiniteMetricMeasureSpace, b0: &Ball, steps: usize) -> Vec<TestSet> {
    let c = b0.center;
    let ecc = (0..space.len())
        .map(|y| space.dist(c, y))
        .fold(0.0, f64::max);
    let b0_size = b0.members(space).len();
    let mut out = vec![];
    if ecc <= b0.radius || steps == 0 {
        return out;
    }
    let radii: Vec<f64> = (0..=steps)
        .map(|i| b0.radius + (ecc - b0.radius) * i as f64 / steps as f64)
        .collect();
    for (i, &r1) in radii.iter().enumerate().take(steps) {
        let tail = outside_b0(space, b0, |x| space.dist(c, x) > r1);
        push_nonempty(
            &mut out,
            format!("tail>{r1:.4}"),
            tail,
            space.len(),
            b0_size,
        );
        for &r2 in &radii[i + 1..] {
            let ann = outside_b0(space, b0, |x| {
                let d = space.dist(c, x);
                d > r1 && d <= r2
            });
            push_nonempty(
                &mut out,
                format!("annulus({r1:.4},{r2:.4}]"),
                ann,
                space.len(),
                b0_size,
            );
        }
    }
    out
}

/// Half-spaces `{x_i > s}` and `{x_i < s}` minus `B0`, for `steps`
/// thresholds per axis across the coordinate range.
pub fn slabs(space: &FiniteMetricMeasureSpace, b0: &Ball, steps: usize) -> Result<Vec<TestSet>> {
    let coords = space
        .coords()
        .ok_or_else(|| crate::Error::Input("slab families need point coordinates".into()))?;
    let d = coords[0].len();
    let b0_size = b0.members(space).len();
    let mut out = vec![];
    for axis in 0..d {
        let lo = coords.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
        let hi = coords
            .iter()
            .map(|p| p[axis])
            .fold(f64::NEG_INFINITY, f64::max);
        for i in 1..steps {
            let s = lo + (hi - lo) * i as f64 / steps as f64;
            let upper = outside_b0(space, b0, |x| coords[x][axis] > s);
            push_nonempty(
                &mut out,
                format!("x{axis}>{s:.4}"),
                upper,
                space.len(),
                b0_size,
            );
            let lower = outside_b0(space, b0, |x| coords[x][axis] < s);
            push_nonempty(
                &mut out,
                format!("x{axis}<{s:.4}"),
                lower,
                space.len(),
                b0_size,
            );
        }
    }
    Ok(out)
}

/// `count` unions of randomly drawn cubes from two tree levels, minus `B0`.
pub fn random_cube_unions(
    space: &FiniteMetricMeasureSpace,
    tree: &DyadicCubeTree,
    b0: &Ball,
    levels: [i32; 2],
    count: usize,
    seed: u64,
) -> Result<Vec<TestSet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b0_size = b0.members(space).len();
    let mut out = vec![];
    for (t, &k) in levels.iter().cycle().take(count).enumerate() {
        let level = tree
            .level(k)
            .ok_or_else(|| crate::Error::Input(format!("tree has no level {k}")))?;
        let mut ids: Vec<usize> = (0..level.cubes.len()).collect();
        ids.shuffle(&mut rng);
        let take = (ids.len() / 4).max(1);
        let mut inside = vec![false; space.len()];
        for &i in &ids[..take] {
            for &x in &level.cubes[i].members {
                inside[x] = true;
            }
        }
        let members = outside_b0(space, b0, |x| inside[x]);
        push_nonempty(
            &mut out,
            format!("cubes#{t}@{k}"),
            members,
            space.len(),
            b0_size,
        );
    }
    Ok(out)
}
