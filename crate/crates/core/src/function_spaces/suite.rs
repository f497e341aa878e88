//! Test functions: random piecewise constants, noise and the logarithmic
//! BMO exemplar.

use rand::Rng;

use crate::discrete_space::FiniteMetricMeasureSpace;

/// Independent uniform values in `[-1, 1]`.
pub fn random_noise<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Constant on the Voronoi cells of `pieces` random points, with uniform
/// values in `[-1, 1]`; ties go to the earlier seed.
pub fn random_piecewise<R: Rng>(
    space: &FiniteMetricMeasureSpace,
    pieces: usize,
    rng: &mut R,
) -> Vec<f64> {
    let n = space.len();
    let seeds: Vec<usize> = (0..pieces.max(1)).map(|_| rng.gen_range(0..n)).collect();
    let values: Vec<f64> = seeds.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
    (0..n)
        .map(|x| {
            let mut best = (f64::INFINITY, 0);
            for (j, &z) in seeds.iter().enumerate() {
                let d = space.dist(x, z);
                if d < best.0 {
                    best = (d, j);
                }
            }
            values[best.1]
        })
        .collect()
}

/// `ln max(rho(x, x0), floor)`.
pub fn log_distance(space: &FiniteMetricMeasureSpace, x0: usize, floor: f64) -> Vec<f64> {
    (0..space.len())
        .map(|x| space.dist(x, x0).max(floor).ln())
        .collect()
}

/// `f - int f / mu(M)`.
pub fn mean_zero(space: &FiniteMetricMeasureSpace, f: &[f64]) -> Vec<f64> {
    let mean = space.integrate(f) / space.total_mass();
    f.iter().map(|v| v - mean).collect()
}

/// `count` functions cycling through noise, piecewise constants with 2 to 8
/// pieces and log-distance exemplars (floor `1e-3`) at random points.
pub fn mixed_suite<R: Rng>(
    space: &FiniteMetricMeasureSpace,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| match k % 3 {
            0 => random_noise(space.len(), rng),
            1 => random_piecewise(space, 2 + k % 7, rng),
            _ => {
                let x0 = rng.gen_range(0..space.len());
                log_distance(space, x0, 1e-3)
            }
        })
        .collect()
}

/// Noise of size `0.1` plus a spike of unit mass on a random ball (radius
/// below `0.2`) around one of the lightest tenth of the points, where the
/// maximal function climbs far above the average.
pub fn light_spike<R: Rng>(space: &FiniteMetricMeasureSpace, rng: &mut R) -> Vec<f64> {
    let mut by_mass: Vec<usize> = (0..space.len()).collect();
    by_mass.sort_by(|&a, &b| space.mass(a).total_cmp(&space.mass(b)));
    let x = by_mass[rng.gen_range(0..(space.len() / 10).max(1))];
    let ball = space.ball(x, rng.gen_range(0.0..0.2));
    let height = 1.0 / space.set_mass(&ball);
    let mut f: Vec<f64> = random_noise(space.len(), rng)
        .iter()
        .map(|v| 0.1 * v)
        .collect();
    for y in ball {
        f[y] += height;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize) -> FiniteMetricMeasureSpace {
        let pts = (0..n).map(|i| vec![i as f64 * 0.1]).collect();
        let m = (0..n).map(|i| 1.0 + i as f64).collect();
        FiniteMetricMeasureSpace::euclidean(pts, m).unwrap()
    }

    #[test]
    fn mixed_suite_is_seeded() {
        let s = line(30);
        let a = mixed_suite(&s, 7, &mut ChaCha8Rng::seed_from_u64(3));
        let b = mixed_suite(&s, 7, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert_eq!(a.len(), 7);
        assert!(a.iter().all(|f| f.len() == 30));
        // the third is a log distance: its minimum sits at its base point
        assert_eq!(
            a[2].iter().cloned().fold(f64::INFINITY, f64::min),
            1e-3f64.ln()
        );
    }

    #[test]
    fn spike_adds_unit_mass_on_light_points() {
        // equal masses, so the stable sort makes points 0..3 the lightest tenth
        let pts = (0..30).map(|i| vec![i as f64 * 0.1]).collect();
        let s = FiniteMetricMeasureSpace::euclidean(pts, vec![0.01; 30]).unwrap();
        let f = light_spike(&s, &mut ChaCha8Rng::seed_from_u64(1));
        let big: Vec<usize> = (0..30).filter(|&x| f[x] > 1.0).collect();
        assert!(!big.is_empty() && big.iter().all(|&x| x < 5));
        let spike: f64 = big.iter().map(|&x| s.mass(x) * f[x]).sum();
        assert!((spike - 1.0).abs() <= 0.1 * s.set_mass(&big) + 1e-12);
    }
}
