//! Empirical local doubling constants `D_{tau,b}`.

use serde::{Deserialize, Serialize};

use super::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub tau: f64,
    pub b: f64,
    /// `sup mu(B(c, tau r)) / mu(B(c, r))` over sampled centers and `0 < r <= b`.
    pub constant: f64,
    pub worst_center: usize,
    pub worst_radius: f64,
    pub centers: usize,
}

/// Exact supremum over `r in (0, b]` of `mu(B(c, tau r)) / mu(B(c, r))`
/// for closed balls at each sampled center.
///
/// On `[d_k, d_{k+1})` between consecutive distinct distances the
/// denominator is constant and the numerator increases toward the open
/// ball of radius `tau d_{k+1}`, so the sup is read off sorted distances.
pub fn estimate_doubling(
    space: &FiniteMetricMeasureSpace,
    b: f64,
    tau: f64,
    centers: &[usize],
) -> Result<DoublingReport> {
    if centers.is_empty() {
        return input("empty center sample");
    }
    if !(b > 0.0) || !(tau >= 1.0) {
        return input("need b > 0 and tau >= 1");
    }
    let mut best = (1.0f64, centers[0], b);
    for &c in centers {
        if c >= space.len() {
            return input(format!("center {c} out of range"));
        }
        let mut order: Vec<(f64, f64)> = (0..space.len())
            .map(|y| (space.dist(c, y), space.mass(y)))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        // prefix[k] = mass of the first k entries
        let mut prefix = Vec::with_capacity(order.len() + 1);
        prefix.push(0.0);
        for (_, m) in &order {
            prefix.push(prefix.last().unwrap() + m);
        }
        let closed = |r: f64| prefix[order.partition_point(|e| e.0 <= r)];
        let open = |r: f64| prefix[order.partition_point(|e| e.0 < r)];
        let mut radii: Vec<f64> = order
            .iter()
            .map(|e| e.0)
            .filter(|&d| d > 0.0 && d < b)
            .collect();
        radii.dedup();
        // left end of each interval of constant denominator: 0+, d_1, d_2, ...
        let mut lefts = vec![0.0];
        lefts.extend(radii.iter().cloned());
        for (k, &left) in lefts.iter().enumerate() {
            let den = closed(left);
            let num = match radii.get(k) {
                Some(&next) => open(tau * next),
                None => closed(tau * b),
            };
            let ratio = num / den;
            if ratio > best.0 {
                best = (ratio, c, radii.get(k).cloned().unwrap_or(b));
            }
        }
    }
    Ok(DoublingReport {
        tau,
        b,
        constant: best.0,
        worst_center: best.1,
        worst_radius: best.2,
        centers: centers.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment(n: usize) -> FiniteMetricMeasureSpace {
        let h = 1.0 / (n - 1) as f64;
        FiniteMetricMeasureSpace::euclidean(
            (0..n).map(|i| vec![i as f64 * h]).collect(),
            vec![h; n],
        )
        .unwrap()
    }

    /// Sweep of radii just below and at every distinct distance.
    fn sweep_oracle(s: &FiniteMetricMeasureSpace, b: f64, tau: f64, centers: &[usize]) -> f64 {
        let mut best = 1.0f64;
        for &c in centers {
            let mut ds: Vec<f64> = (0..s.len())
                .map(|y| s.dist(c, y))
                .filter(|d| *d > 0.0)
                .collect();
            ds.push(b);
            let mut rs = Vec::new();
            for d in ds {
                if d <= b {
                    rs.push(d);
                    rs.push(d * (1.0 - 1e-9));
                }
            }
            for r in rs {
                best = best.max(s.ball_mass(c, tau * r) / s.ball_mass(c, r));
            }
        }
        best
    }

    #[test]
    fn flat_segment_matches_sweep() {
        // dyadic spacing keeps every distance exact
        let s = segment(129);
        let centers: Vec<usize> = (40..=90).collect();
        let rep = estimate_doubling(&s, 0.2, 2.0, &centers).unwrap();
        let oracle = sweep_oracle(&s, 0.2, 2.0, &centers);
        assert!((rep.constant - oracle).abs() < 1e-12);
        // the one-point ball against the three-point ball
        assert!((rep.constant - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_space() {
        let s = FiniteMetricMeasureSpace::euclidean(vec![vec![0.0]], vec![2.0]).unwrap();
        assert_eq!(estimate_doubling(&s, 1.0, 2.0, &[0]).unwrap().constant, 1.0);
    }

    #[test]
    fn monotone_in_tau_and_b() {
        let s = segment(41);
        let centers: Vec<usize> = (0..41).collect();
        let base = estimate_doubling(&s, 0.1, 2.0, &centers).unwrap().constant;
        assert!(estimate_doubling(&s, 0.2, 2.0, &centers).unwrap().constant >= base);
        assert!(estimate_doubling(&s, 0.1, 3.0, &centers).unwrap().constant >= base);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(estimate_doubling(&segment(3), 1.0, 2.0, &[]).is_err());
    }
}
