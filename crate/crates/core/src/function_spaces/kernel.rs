//! Kernel operators: Hörmander-type constants, the `L^2` operator norm and
//! images of atoms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::atoms::Atom;
use super::balls::BallFamily;
use crate::discrete_space::FiniteMetricMeasureSpace;
use crate::error::{input, Result};

/// `k(x, y)` off the diagonal, stored row-major with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub n: usize,
    pub values: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_fn(
        space: &FiniteMetricMeasureSpace,
        k: impl Fn(usize, usize) -> f64 + Sync,
    ) -> Result<Self> {
        let n = space.len();
        let values: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|i| {
                let (x, y) = (i / n, i % n);
                if x == y {
                    0.0
                } else {
                    k(x, y)
                }
            })
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return input(format!("kernel is not finite at ({}, {})", i / n, i % n));
        }
        Ok(KernelMatrix { n, values })
    }

    /// `e^{-rho(x, y)} / mu(B(x, rho(x, y)))`.
    pub fn toy(space: &FiniteMetricMeasureSpace) -> Result<Self> {
        Self::from_fn(space, |x, y| {
            let d = space.dist(x, y);
            (-d).exp() / space.ball_mass(x, d)
        })
    }

    /// `e^{-rho(x, y)}`, symmetric.
    pub fn symmetric(space: &FiniteMetricMeasureSpace) -> Result<Self> {
        Self::from_fn(space, |x, y| (-space.dist(x, y)).exp())
    }

    pub fn constant(space: &FiniteMetricMeasureSpace, c: f64) -> Result<Self> {
        Self::from_fn(space, |_, _| c)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                values[y * n + x] = self.values[x * n + y];
            }
        }
        KernelMatrix { n, values }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|x| (0..x).all(|y| self.get(x, y) == self.get(y, x)))
    }

    /// `Tf(x) = sum_y k(x, y) f(y) mu({y})`.
    pub fn apply(&self, space: &FiniteMetricMeasureSpace, f: &[f64]) -> Vec<f64> {
        let m = space.masses();
        self.values
            .par_chunks(self.n)
            .map(|row| row.iter().zip(f).zip(m).map(|((k, v), w)| k * v * w).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub b: f64,
    /// `sup_B sup_{x,x' in B} int_{(2B)^c} |k(x,y) - k(x',y)| dmu(y)`.
    pub upsilon: f64,
    /// The same with the roles of the variables exchanged.
    pub nu: f64,
    /// `(center, x, x')` attaining each sup.
    pub upsilon_witness: (usize, usize, usize),
    pub nu_witness: (usize, usize, usize),
    /// `sup_B r_B sup_{x in B} int_{(2B)^c} |grad_x k(x,y)| dmu(y)` when a
    /// gradient is supplied, and its transpose analogue.
    pub upsilon_prime: Option<f64>,
    pub nu_prime: Option<f64>,
}

/// For fixed `x, x'` in `B(c, r)` the integral over `{rho(c, y) > 2r}`
/// decreases in `r`, so the sup over balls is attained at
/// `r = max(rho(c, x), rho(c, x'))`.
fn difference_sup(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    k: &KernelMatrix,
) -> (f64, (usize, usize, usize)) {
    let m = space.masses();
    (0..fam.n_centers())
        .into_par_iter()
        .map(|c| {
            let row = space.row(c);
            let mut far: Vec<usize> = (0..space.len()).collect();
            far.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            let inside: Vec<usize> = fam.order(c).iter().map(|&x| x as usize).collect();
            let mut best = (0.0f64, (c, c, c));
            for (i, &x) in inside.iter().enumerate() {
                for &xp in &inside[..i] {
                    let r = row[x].max(row[xp]);
                    let mut s = 0.0;
                    for &y in far.iter().take_while(|&&y| row[y] > 2.0 * r) {
                        s += (k.get(x, y) - k.get(xp, y)).abs() * m[y];
                    }
                    if s > best.0 {
                        best = (s, (c, xp, x));
                    }
                }
            }
            best
        })
        .reduce(
            || (0.0, (0, 0, 0)),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        )
}

/// `sup_B r_B sup_{x in B} int_{(2B)^c} g(x, y) dmu(y)` over the family.
fn gradient_sup(space: &FiniteMetricMeasureSpace, fam: &BallFamily, g: &KernelMatrix) -> f64 {
    let m = space.masses();
    (0..fam.n_centers())
        .into_par_iter()
        .map(|c| {
            let row = space.row(c);
            let mut far: Vec<usize> = (0..space.len()).collect();
            far.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            let radii: Vec<f64> = fam.balls_at(c).map(|b| b.radius).collect();
            let mut best = 0.0f64;
            for &x in fam.order(c) {
                let x = x as usize;
                // tail sums from the far end, walked as the radius grows
                let mut cum = Vec::with_capacity(far.len() + 1);
                cum.push(0.0);
                for &y in &far {
                    cum.push(cum.last().unwrap() + g.get(x, y) * m[y]);
                }
                let mut cut = far.len();
                for &r in radii.iter().filter(|&&r| r >= row[x]) {
                    while cut > 0 && row[far[cut - 1]] <= 2.0 * r {
                        cut -= 1;
                    }
                    best = best.max(r * cum[cut]);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Exact constants over the family of balls of radius `<= b`.
/// `grad_x` and `grad_y` hold `|grad_x k(x, y)|` and `|grad_y k(x, y)|`.
pub fn hormander_constants(
    space: &FiniteMetricMeasureSpace,
    fam: &BallFamily,
    k: &KernelMatrix,
    grad_x: Option<&KernelMatrix>,
    grad_y: Option<&KernelMatrix>,
) -> Result<KernelConstants> {
    if k.n != space.len() {
        return input("kernel size does not match the space");
    }
    let (upsilon, upsilon_witness) = difference_sup(space, fam, k);
    let (nu, nu_witness) = difference_sup(space, fam, &k.transpose());
    Ok(KernelConstants {
        b: fam.b,
        upsilon,
        nu,
        upsilon_witness,
        nu_witness,
        upsilon_prime: grad_x.map(|g| gradient_sup(space, fam, g)),
        nu_prime: grad_y.map(|g| gradient_sup(space, fam, &g.transpose())),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `||T||_{L^2(mu)}`: the top singular value of `M^{1/2} K M^{1/2}` by power
/// iteration on its Gram matrix from the constant vector.
pub fn l2_operator_norm(
    space: &FiniteMetricMeasureSpace,
    k: &KernelMatrix,
    tol: f64,
    max_iter: usize,
) -> OperatorNorm {
    let n = k.n;
    let root: Vec<f64> = space.masses().iter().map(|m| m.sqrt()).collect();
    let a = |v: &[f64], transpose: bool| -> Vec<f64> {
        let scaled: Vec<f64> = v.iter().zip(&root).map(|(a, b)| a * b).collect();
        let out: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| if transpose { k.get(j, i) } else { k.get(i, j) } * scaled[j])
                    .sum::<f64>()
                    * root[i]
            })
            .collect();
        out
    };
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut norm = 0.0;
    for it in 1..=max_iter {
        let av = a(&v, false);
        let new = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        let w = a(&av, true);
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn == 0.0 {
            return OperatorNorm {
                norm: new,
                iterations: it,
                converged: true,
            };
        }
        v = w.iter().map(|x| x / wn).collect();
        if (new - norm).abs() <= tol * new {
            return OperatorNorm {
                norm: new,
                iterations: it,
                converged: true,
            };
        }
        norm = new;
    }
    OperatorNorm {
        norm,
        iterations: max_iter,
        converged: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomImageReport {
    pub nu: f64,
    pub operator_norm: f64,
    /// `||T a||_1` per atom.
    pub images: Vec<f64>,
    /// `max ||T a||_1 / (nu + ||T||_2)`, the single constant that works.
    pub constant: f64,
}

pub fn atom_image_check(
    space: &FiniteMetricMeasureSpace,
    k: &KernelMatrix,
    atoms: &[Atom],
    nu: f64,
    operator_norm: f64,
) -> AtomImageReport {
    let images: Vec<f64> = atoms
        .iter()
        .map(|a| {
            let mut f = vec![0.0; space.len()];
            a.accumulate(space, 1.0, &mut f);
            space.lp_norm(&k.apply(space, &f), 1.0)
        })
        .collect();
    let constant = images
        .iter()
        .fold(0.0f64, |c, &i| c.max(i / (nu + operator_norm)));
    AtomImageReport {
        nu,
        operator_norm,
        images,
        constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_spaces::atoms::random_atom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize) -> FiniteMetricMeasureSpace {
        let h = 4.0 / n as f64;
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 + 0.5) * h - 2.0]).collect();
        let m = pts.iter().map(|p| (-p[0] * p[0]).exp() * h).collect();
        FiniteMetricMeasureSpace::euclidean(pts, m).unwrap()
    }

    /// Every ball, every pair, every far point.
    fn brute_upsilon(s: &FiniteMetricMeasureSpace, k: &KernelMatrix, b: f64) -> f64 {
        let mut best = 0.0f64;
        for c in 0..s.len() {
            for r in s.row(c) {
                if r > b {
                    continue;
                }
                let ball = s.ball(c, r);
                for &x in &ball {
                    for &xp in &ball {
                        let v: f64 = (0..s.len())
                            .filter(|&y| s.dist(c, y) > 2.0 * r)
                            .map(|y| (k.get(x, y) - k.get(xp, y)).abs() * s.mass(y))
                            .sum();
                        best = best.max(v);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn constant_kernel_has_zero_constants() {
        let s = space(20);
        let fam = BallFamily::new(&s, 1.0).unwrap();
        let k = KernelMatrix::constant(&s, 3.0).unwrap();
        let zero = KernelMatrix::constant(&s, 0.0).unwrap();
        let c = hormander_constants(&s, &fam, &k, Some(&zero), Some(&zero)).unwrap();
        assert_eq!((c.upsilon, c.nu), (0.0, 0.0));
        assert_eq!((c.upsilon_prime, c.nu_prime), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn symmetric_kernel_gives_equal_constants() {
        let s = space(30);
        let fam = BallFamily::new(&s, 0.8).unwrap();
        let k = KernelMatrix::symmetric(&s).unwrap();
        assert!(k.is_symmetric());
        let c = hormander_constants(&s, &fam, &k, None, None).unwrap();
        assert_eq!(c.upsilon, c.nu);
        assert!(c.upsilon > 0.0);
    }

    #[test]
    fn toy_constants_match_brute_force() {
        let s = space(16);
        let fam = BallFamily::new(&s, 0.9).unwrap();
        let k = KernelMatrix::toy(&s).unwrap();
        let c = hormander_constants(&s, &fam, &k, None, None).unwrap();
        let u = brute_upsilon(&s, &k, 0.9);
        let v = brute_upsilon(&s, &k.transpose(), 0.9);
        assert!((c.upsilon - u).abs() <= 1e-12 * u.max(1.0));
        assert!((c.nu - v).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn power_iteration_matches_a_diagonalizable_case() {
        // K = 1 off the diagonal with unit masses: T = J - I, norm n - 1
        let s = FiniteMetricMeasureSpace::euclidean(
            (0..6).map(|i| vec![i as f64]).collect(),
            vec![1.0; 6],
        )
        .unwrap();
        let k = KernelMatrix::constant(&s, 1.0).unwrap();
        let op = l2_operator_norm(&s, &k, 1e-14, 1000);
        assert!(op.converged);
        assert!((op.norm - 5.0).abs() < 1e-9);
    }

    #[test]
    fn atom_images_are_bounded() {
        let s = space(60);
        let fam = BallFamily::new(&s, 1.0).unwrap();
        let k = KernelMatrix::toy(&s).unwrap();
        let c = hormander_constants(&s, &fam, &k, None, None).unwrap();
        let op = l2_operator_norm(&s, &k, 1e-12, 2000);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let atoms: Vec<Atom> = (0..20)
            .map(|_| random_atom(&s, &fam, 2.0, &mut rng).unwrap())
            .collect();
        let rep = atom_image_check(&s, &k, &atoms, c.nu, op.norm);
        assert!(rep.constant.is_finite() && rep.constant > 0.0);
        for i in &rep.images {
            assert!(*i <= rep.constant * (c.nu + op.norm) * (1.0 + 1e-12));
        }
    }
}
