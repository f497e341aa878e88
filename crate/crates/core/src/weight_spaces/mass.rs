//! Midpoint quadrature of `e^{+-phi}` over boxes and balls.

use super::spec::{Sign, WeightSpec};
use crate::error::{input, Result};
use crate::region::Region;

/// `mu_{+-phi}(region)` on the origin-anchored lattice of cells `h Z^d`.
///
/// For a box, each cell contributes the density at its center times the
/// volume of its overlap with the box; for a ball, cells whose center lies
/// in the ball contribute `h^d` times the density. Either way the result is
/// monotone under inclusion of regions of the same kind and additive over
/// boxes sharing faces.
pub fn weighted_mass(spec: &WeightSpec, sign: Sign, region: &Region, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return input("quadrature resolution must be positive");
    }
    if region.dim() != spec.dimension {
        return input("region dimension differs from the weight dimension");
    }
    let bb = region.bounding_box()?;
    let d = bb.dim();
    let first: Vec<i64> = bb.lo.iter().map(|l| (l / h).floor() as i64).collect();
    let last: Vec<i64> = bb.hi.iter().map(|u| (u / h).ceil() as i64 - 1).collect();
    let counts: Vec<usize> = first
        .iter()
        .zip(&last)
        .map(|(f, l)| (l - f + 1).max(0) as usize)
        .collect();
    let total: usize = counts.iter().product();
    let mut acc = 0.0;
    let mut center = vec![0.0; d];
    for cell in 0..total {
        let mut rest = cell;
        let mut weight = 1.0;
        for j in 0..d {
            let k = first[j] + (rest % counts[j]) as i64;
            rest /= counts[j];
            let a = k as f64 * h;
            center[j] = a + 0.5 * h;
            if let Region::Box(b) = region {
                weight *= (b.hi[j].min(a + h) - b.lo[j].max(a)).max(0.0);
            }
        }
        match region {
            Region::Box(_) => {
                if weight > 0.0 {
                    acc += weight * spec.density(sign, &center)?;
                }
            }
            Region::Ball(ball) => {
                if ball.contains(&center) {
                    acc += spec.density(sign, &center)?;
                }
            }
        }
    }
    if let Region::Ball(_) = region {
        acc *= h.powi(d as i32);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{BoxRegion, EuclideanBall};

    fn gauss_1d_oracle() -> f64 {
        // int_{-12}^{12} e^{-t^2} dt by a composite Simpson rule
        let n = 24_000;
        let (a, b) = (-12.0f64, 12.0f64);
        let h = (b - a) / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn flat_unit_box_has_unit_mass() {
        for d in 1..=3 {
            let spec = WeightSpec::constant(d);
            let r = Region::Box(BoxRegion::new(vec![0.0; d], vec![1.0; d]).unwrap());
            let m = weighted_mass(&spec, Sign::Plus, &r, 0.1).unwrap();
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_mass_tends_to_pi_power() {
        let g1 = gauss_1d_oracle();
        assert!((g1 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        for d in 1..=2 {
            let spec = WeightSpec::gaussian(d);
            let r = Region::Box(BoxRegion::centered(d, 6.0).unwrap());
            let m = weighted_mass(&spec, Sign::Minus, &r, 0.01).unwrap();
            assert!((m - g1.powi(d as i32)).abs() < 1e-4, "{m}");
        }
    }

    #[test]
    fn plus_mass_of_growing_boxes_diverges() {
        let spec = WeightSpec::gaussian(2);
        let mut last = 0.0;
        for l in [1.0, 2.0, 3.0, 4.0] {
            let r = Region::Box(BoxRegion::centered(2, l).unwrap());
            let m = weighted_mass(&spec, Sign::Plus, &r, 0.02).unwrap();
            assert!(m > 10.0 * last);
            last = m;
        }
        assert!(last > 1e12);
    }

    #[test]
    fn additive_over_adjacent_boxes() {
        let spec = WeightSpec::power(1.5, 2).unwrap();
        let whole = Region::Box(BoxRegion::new(vec![-1.0, -1.0], vec![1.3, 1.0]).unwrap());
        let left = Region::Box(BoxRegion::new(vec![-1.0, -1.0], vec![0.37, 1.0]).unwrap());
        let right = Region::Box(BoxRegion::new(vec![0.37, -1.0], vec![1.3, 1.0]).unwrap());
        let h = 0.05;
        let w = weighted_mass(&spec, Sign::Minus, &whole, h).unwrap();
        let s = weighted_mass(&spec, Sign::Minus, &left, h).unwrap()
            + weighted_mass(&spec, Sign::Minus, &right, h).unwrap();
        assert!((w - s).abs() < 1e-12 * w);
    }

    #[test]
    fn monotone_in_balls() {
        let spec = WeightSpec::gaussian(2);
        let mut last = 0.0;
        for r in [0.5, 0.9, 1.3, 2.0] {
            let ball = Region::Ball(EuclideanBall {
                center: vec![0.2, 0.0],
                radius: r,
            });
            let m = weighted_mass(&spec, Sign::Minus, &ball, 0.05).unwrap();
            assert!(m >= last);
            last = m;
        }
    }
}
