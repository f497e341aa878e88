//! Chains of net centers with short links, and the multiplicity of the
//! covering by balls `B(z, b)` around net centers.

use serde::{Deserialize, Serialize};

use super::nets::NetHierarchy;
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Error, Result};

/// Parameters of a chain construction at net level `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub nu: i32,
    pub b: f64,
    /// Midpoint ratio used in the length bound (the measured one on grids).
    pub beta: f64,
    /// Slack on the midpoint inequalities (grid resolution).
    pub relaxation: f64,
    pub r0: f64,
    pub a0: f64,
}

impl ChainParams {
    /// `delta^nu min(1, 2 a0) > R0` and `b > 4 delta^nu max(1/(1-beta), a0)`.
    pub fn hypotheses_hold(&self, delta: f64) -> bool {
        let s = delta.powi(self.nu);
        s * (2.0 * self.a0).min(1.0) > self.r0
            && self.b > 4.0 * s * (1.0 / (1.0 - self.beta)).max(self.a0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub centers: Vec<usize>,
    pub b: f64,
    pub links: Vec<f64>,
    /// `rho(first, last)`.
    pub span: f64,
    /// `4 (2 d / b)^{1/[1 - log2(1 + beta)]} + 1`.
    pub bound: f64,
    pub beta: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `N <= bound`, where a pair closer than `b / 2` may always use the
    /// two-point chain even when the formula drops below 2.
    pub fn within_bound(&self) -> bool {
        let floor = if self.centers.len() > 1 { 2.0 } else { 1.0 };
        self.centers.len() as f64 <= self.bound.max(floor)
    }

    pub fn links_short(&self) -> bool {
        self.links.iter().all(|&l| l < self.b / 2.0)
    }
}

/// `4 (2 d / b)^{1/[1 - log2(1 + beta)]} + 1`.
pub fn chain_length_bound(d: f64, b: f64, beta: f64) -> f64 {
    4.0 * (2.0 * d / b).powf(1.0 / (1.0 - (1.0 + beta).log2())) + 1.0
}

/// Point minimizing `max(rho(x, w), rho(y, w))`, ties to the smaller id.
fn best_midpoint(space: &FiniteMetricMeasureSpace, x: usize, y: usize) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for w in 0..space.len() {
        let v = space.dist(x, w).max(space.dist(y, w));
        if v < best.1 {
            best = (w, v);
        }
    }
    best
}

/// Splits `o -> z` at snapped approximate midpoints until every link is
/// shorter than `b / 2`.
pub fn build_chain(
    space: &FiniteMetricMeasureSpace,
    nets: &NetHierarchy,
    o: usize,
    z: usize,
    params: &ChainParams,
) -> Result<Chain> {
    let centers = nets
        .level(params.nu)
        .ok_or_else(|| Error::Input(format!("net level {} not built", params.nu)))?;
    if centers.binary_search(&o).is_err() || centers.binary_search(&z).is_err() {
        return input("chain endpoints must be net centers of level nu");
    }
    if !(params.b > 0.0) {
        return input("b must be positive");
    }
    let span = space.dist(o, z);
    let mut out = vec![o];
    if o != z {
        extend(space, nets, params, o, z, &mut out, 0)?;
    }
    let links = out.windows(2).map(|w| space.dist(w[0], w[1])).collect();
    Ok(Chain {
        centers: out,
        b: params.b,
        links,
        span,
        bound: chain_length_bound(span, params.b, params.beta),
        beta: params.beta,
    })
}

/// Appends the chain from `x` (already pushed) to `y`.
fn extend(
    space: &FiniteMetricMeasureSpace,
    nets: &NetHierarchy,
    params: &ChainParams,
    x: usize,
    y: usize,
    out: &mut Vec<usize>,
    depth: usize,
) -> Result<()> {
    let d = space.dist(x, y);
    if d < params.b / 2.0 {
        out.push(y);
        return Ok(());
    }
    let geometry = |reason: String| Error::Geometry {
        from: x,
        to: y,
        reason,
    };
    if depth > 64 {
        return Err(geometry("midpoint recursion does not terminate".into()));
    }
    let (w, reach) = best_midpoint(space, x, y);
    if reach >= params.beta * d + params.relaxation {
        return Err(geometry(format!(
            "best midpoint reaches {reach}, not below beta d + relaxation = {}",
            params.beta * d + params.relaxation
        )));
    }
    let c = nets
        .nearest_center(space, params.nu, w)
        .expect("level checked by caller");
    if space.dist(x, c).max(space.dist(c, y)) >= d {
        return Err(geometry(format!(
            "snapped midpoint {c} does not shorten the link"
        )));
    }
    extend(space, nets, params, x, c, out, depth + 1)?;
    extend(space, nets, params, c, y, out, depth + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainAudit {
    pub links_short: bool,
    pub within_bound: bool,
    /// `B(z_{j+1}, a0 delta^nu) ⊆ B(z_j, b) ∩ B(z_{j+1}, b)` for every link.
    pub certificates: bool,
    /// Largest `mu(B(z_{j+1}, b)) / mu(B(z_{j+1}, a0 delta^nu))` along the chain.
    pub max_ball_ratio: f64,
    pub failing_link: Option<usize>,
}

pub fn audit_chain(
    space: &FiniteMetricMeasureSpace,
    chain: &Chain,
    small_radius: f64,
) -> ChainAudit {
    let mut certificates = true;
    let mut failing_link = None;
    let mut max_ball_ratio = 1.0f64;
    for (j, w) in chain.centers.windows(2).enumerate() {
        let (p, q) = (w[0], w[1]);
        let ok = (0..space.len())
            .filter(|&y| space.dist(q, y) <= small_radius)
            .all(|y| space.dist(p, y) <= chain.b && space.dist(q, y) <= chain.b);
        if !ok && certificates {
            certificates = false;
            failing_link = Some(j);
        }
        max_ball_ratio =
            max_ball_ratio.max(space.ball_mass(q, chain.b) / space.ball_mass(q, small_radius));
    }
    ChainAudit {
        links_short: chain.links_short(),
        within_bound: chain.within_bound(),
        certificates,
        max_ball_ratio,
        failing_link,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub nu: i32,
    pub b: f64,
    /// Largest number of balls `B(z, b)` containing one point.
    pub n0: usize,
    pub min_count: usize,
}

/// `N0 = max_x #{z in Z^nu : rho(x, z) <= b}`; a point covered by no ball is
/// a geometry error (it would contradict the maximality of the net).
pub fn covering_multiplicity(
    space: &FiniteMetricMeasureSpace,
    nets: &NetHierarchy,
    nu: i32,
    b: f64,
) -> Result<CoveringReport> {
    let centers = nets
        .level(nu)
        .ok_or_else(|| Error::Input(format!("net level {nu} not built")))?;
    let mut n0 = 0;
    let mut min_count = usize::MAX;
    for x in 0..space.len() {
        let c = centers.iter().filter(|&&z| space.dist(x, z) <= b).count();
        if c == 0 {
            return Err(Error::Geometry {
                from: x,
                to: x,
                reason: format!("point lies in no ball B(z, {b}) around level-{nu} centers"),
            });
        }
        n0 = n0.max(c);
        min_count = min_count.min(c);
    }
    Ok(CoveringReport {
        nu,
        b,
        n0,
        min_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::christ_cubes::build_nets;
    use std::collections::VecDeque;

    fn line(n: usize) -> FiniteMetricMeasureSpace {
        let h = 1.0 / (n - 1) as f64;
        FiniteMetricMeasureSpace::euclidean(
            (0..n).map(|i| vec![i as f64 * h]).collect(),
            vec![h; n],
        )
        .unwrap()
    }

    fn params(nu: i32, b: f64) -> ChainParams {
        ChainParams {
            nu,
            b,
            beta: 0.6,
            relaxation: 0.0,
            r0: 0.0,
            a0: 0.25,
        }
    }

    /// Fewest hops between centers using links shorter than b/2.
    fn bfs_hops(
        s: &FiniteMetricMeasureSpace,
        centers: &[usize],
        o: usize,
        z: usize,
        b: f64,
    ) -> usize {
        let mut seen = vec![usize::MAX; s.len()];
        let mut q = VecDeque::from([o]);
        seen[o] = 0;
        while let Some(u) = q.pop_front() {
            for &v in centers {
                if seen[v] == usize::MAX && s.dist(u, v) < b / 2.0 {
                    seen[v] = seen[u] + 1;
                    q.push_back(v);
                }
            }
        }
        seen[z]
    }

    #[test]
    fn trivial_chains() {
        let s = line(65);
        let nets = build_nets(&s, 0.5, None).unwrap();
        let c = build_chain(&s, &nets, 0, 0, &params(nets.k_max(), 0.5)).unwrap();
        assert_eq!(c.centers, vec![0]);
        let c = build_chain(&s, &nets, 0, 3, &params(nets.k_max(), 0.5)).unwrap();
        assert_eq!(c.centers, vec![0, 3]);
    }

    #[test]
    fn line_chain_against_bfs_and_bound() {
        let s = line(129);
        let nets = build_nets(&s, 0.5, None).unwrap();
        let nu = 4; // spacing 1/16
        let centers = nets.level(nu).unwrap().to_vec();
        let b = 0.3;
        let p = params(nu, b);
        for (&o, &z) in [
            (centers[0], *centers.last().unwrap()),
            (centers[2], centers[11]),
        ]
        .iter()
        .map(|(a, b)| (a, b))
        {
            let ch = build_chain(&s, &nets, o, z, &p).unwrap();
            assert!(ch.links_short() && ch.within_bound(), "{ch:?}");
            let hops = bfs_hops(&s, &centers, o, z, b);
            assert!(ch.len() > hops, "chain cannot beat the hop oracle");
            assert!((ch.len() as f64) <= chain_length_bound(ch.span, b, 0.6));
            let audit = audit_chain(&s, &ch, 0.25 * nets.radius(nu));
            assert!(audit.certificates);
        }
    }

    #[test]
    fn two_point_space_has_no_midpoints() {
        let s = line(2);
        let nets = build_nets(&s, 0.5, Some((1, 1))).unwrap();
        let err = build_chain(&s, &nets, 0, 1, &params(1, 0.5)).unwrap_err();
        assert!(matches!(err, Error::Geometry { .. }));
    }

    #[test]
    fn covering_counts_on_the_line() {
        let s = line(65);
        let nets = build_nets(&s, 0.5, None).unwrap();
        let one = covering_multiplicity(&s, &nets, nets.k_min, 10.0).unwrap();
        assert_eq!((one.n0, one.min_count), (1, 1));
        // spacing 1/16 net is every fourth point, b = 4/16 -> at most 9 centers
        let nu = 4;
        let sp = nets.radius(nu);
        let rep = covering_multiplicity(&s, &nets, nu, 4.0 * sp).unwrap();
        let exact = (0..s.len())
            .map(|x| {
                nets.level(nu)
                    .unwrap()
                    .iter()
                    .filter(|&&z| s.dist(x, z) <= 4.0 * sp)
                    .count()
            })
            .max()
            .unwrap();
        assert_eq!(rep.n0, exact);
        assert_eq!(rep.n0, 9);
        assert!(rep.min_count >= 1);
    }
}
