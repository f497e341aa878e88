//! Weight functions `phi` on R^d together with their closed-form
//! derivatives, and the conformal factor `m = 1 + |grad phi|`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::region::norm;

/// One summand of a [`WeightFamily::LinearCombination`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTerm {
    pub coefficient: f64,
    #[serde(flatten)]
    pub family: WeightFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum WeightFamily {
    /// `phi = value`.
    Constant {
        #[serde(default)]
        value: f64,
    },
    /// `phi = |x|^alpha`.
    Power {
        alpha: f64,
    },
    /// `phi = |x|^2`, the Gauss-space weight.
    Gaussian,
    /// `phi = exp(|x|^alpha)`.
    Exponential {
        alpha: f64,
    },
    LinearCombination {
        terms: Vec<WeightTerm>,
    },
    /// Values on a regular grid (axis 0 fastest), multilinear in between.
    /// Derivatives are finite differences of the interpolant.
    TabulatedOnGrid {
        origin: Vec<f64>,
        spacing: f64,
        shape: Vec<usize>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub family: WeightFamily,
    pub dimension: usize,
    /// Radius beyond which `phi` is C^2. Defaults per family when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
}

/// Which of the two measures `e^{+phi} dx` / `e^{-phi} dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "pos" => Ok(Sign::Plus),
            "-" | "minus" | "neg" => Ok(Sign::Minus),
            other => input(format!("unknown sign {other:?}")),
        }
    }
}

/// Radial profile `g`, `g'`, `g''` of `phi(x) = g(|x|)`.
#[derive(Debug, Clone, Copy)]
struct Radial {
    g: f64,
    dg: f64,
    ddg: f64,
}

fn radial_power(alpha: f64, r: f64) -> Radial {
    Radial {
        g: r.powf(alpha),
        dg: alpha * r.powf(alpha - 1.0),
        ddg: alpha * (alpha - 1.0) * r.powf(alpha - 2.0),
    }
}

fn radial_exponential(alpha: f64, r: f64) -> Radial {
    let e = r.powf(alpha).exp();
    Radial {
        g: e,
        dg: e * alpha * r.powf(alpha - 1.0),
        ddg: e
            * (alpha * alpha * r.powf(2.0 * alpha - 2.0)
                + alpha * (alpha - 1.0) * r.powf(alpha - 2.0)),
    }
}

fn eval_err(x: &[f64], reason: impl Into<String>) -> Error {
    Error::Evaluation {
        point: x.to_vec(),
        reason: reason.into(),
    }
}

impl WeightFamily {
    fn default_tau0(&self) -> f64 {
        match self {
            WeightFamily::Constant { .. } | WeightFamily::Gaussian => 0.0,
            WeightFamily::Power { alpha } | WeightFamily::Exponential { alpha } => {
                if *alpha >= 2.0 {
                    0.0
                } else {
                    1.0
                }
            }
            WeightFamily::LinearCombination { terms } => terms
                .iter()
                .map(|t| t.family.default_tau0())
                .fold(0.0, f64::max),
            WeightFamily::TabulatedOnGrid { .. } => 0.0,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            WeightFamily::Power { alpha } | WeightFamily::Exponential { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return input(format!("exponent alpha must be positive, got {alpha}"));
                }
            }
            WeightFamily::LinearCombination { terms } => {
                for t in terms {
                    t.family.validate(d)?;
                }
            }
            WeightFamily::TabulatedOnGrid {
                origin,
                spacing,
                shape,
                values,
            } => {
                if origin.len() != d || shape.len() != d {
                    return input("tabulated grid dimension mismatch");
                }
                if !(*spacing > 0.0) || shape.iter().any(|&s| s < 2) {
                    return input("tabulated grid needs positive spacing and >= 2 nodes per axis");
                }
                if values.len() != shape.iter().product::<usize>() {
                    return input("tabulated grid value count does not match its shape");
                }
            }
            WeightFamily::Constant { .. } | WeightFamily::Gaussian => {}
        }
        Ok(())
    }

    fn radial(&self, r: f64) -> Option<Radial> {
        match self {
            WeightFamily::Power { alpha } => Some(radial_power(*alpha, r)),
            WeightFamily::Gaussian => Some(radial_power(2.0, r)),
            WeightFamily::Exponential { alpha } => Some(radial_exponential(*alpha, r)),
            _ => None,
        }
    }

    fn alpha(&self) -> f64 {
        match self {
            WeightFamily::Power { alpha } | WeightFamily::Exponential { alpha } => *alpha,
            _ => 2.0,
        }
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            WeightFamily::Constant { value } => Ok(*value),
            WeightFamily::Power { .. }
            | WeightFamily::Gaussian
            | WeightFamily::Exponential { .. } => {
                Ok(self.radial(norm(x)).map(|p| p.g).unwrap_or(0.0))
            }
            WeightFamily::LinearCombination { terms } => {
                let mut s = 0.0;
                for t in terms {
                    s += t.coefficient * t.family.value(x)?;
                }
                Ok(s)
            }
            WeightFamily::TabulatedOnGrid { .. } => self.interpolate(x),
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = x.len();
        match self {
            WeightFamily::Constant { .. } => Ok(vec![0.0; d]),
            WeightFamily::Power { .. }
            | WeightFamily::Gaussian
            | WeightFamily::Exponential { .. } => {
                let r = norm(x);
                if r == 0.0 {
                    // alpha == 1 has a kink at the origin; the minimal-norm
                    // subgradient is used there.
                    if self.alpha() < 1.0 {
                        return Err(eval_err(x, "gradient blows up at the origin for alpha < 1"));
                    }
                    return Ok(vec![0.0; d]);
                }
                let p = self.radial(r).expect("radial family");
                Ok(x.iter().map(|xi| p.dg * xi / r).collect())
            }
            WeightFamily::LinearCombination { terms } => {
                let mut g = vec![0.0; d];
                for t in terms {
                    for (gi, ti) in g.iter_mut().zip(t.family.gradient(x)?) {
                        *gi += t.coefficient * ti;
                    }
                }
                Ok(g)
            }
            WeightFamily::TabulatedOnGrid { spacing, .. } => {
                let step = 1e-3 * spacing;
                self.finite_difference(x, step, |y| self.interpolate(y))
            }
        }
    }

    /// Row-major `d x d` Hessian.
    fn hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = x.len();
        match self {
            WeightFamily::Constant { .. } => Ok(vec![0.0; d * d]),
            WeightFamily::Power { .. }
            | WeightFamily::Gaussian
            | WeightFamily::Exponential { .. } => {
                let r = norm(x);
                let alpha = self.alpha();
                let mut h = vec![0.0; d * d];
                if r == 0.0 {
                    if alpha < 2.0 {
                        return Err(eval_err(
                            x,
                            "Hessian is singular at the origin for alpha < 2",
                        ));
                    }
                    let c = if alpha == 2.0 { 2.0 } else { 0.0 };
                    for i in 0..d {
                        h[i * d + i] = c;
                    }
                    return Ok(h);
                }
                let p = self.radial(r).expect("radial family");
                let tangential = p.dg / r;
                for i in 0..d {
                    for j in 0..d {
                        let uu = x[i] * x[j] / (r * r);
                        let id = if i == j { 1.0 } else { 0.0 };
                        h[i * d + j] = p.ddg * uu + tangential * (id - uu);
                    }
                }
                Ok(h)
            }
            WeightFamily::LinearCombination { terms } => {
                let mut h = vec![0.0; d * d];
                for t in terms {
                    for (hi, ti) in h.iter_mut().zip(t.family.hessian(x)?) {
                        *hi += t.coefficient * ti;
                    }
                }
                Ok(h)
            }
            WeightFamily::TabulatedOnGrid { spacing, .. } => {
                let step = *spacing;
                let mut h = vec![0.0; d * d];
                for j in 0..d {
                    let (lo, hi, width) = self.stencil(x, j, step);
                    let gl = self.gradient(&lo)?;
                    let gh = self.gradient(&hi)?;
                    for i in 0..d {
                        h[i * d + j] = (gh[i] - gl[i]) / width;
                    }
                }
                // symmetrize
                for i in 0..d {
                    for j in (i + 1)..d {
                        let s = 0.5 * (h[i * d + j] + h[j * d + i]);
                        h[i * d + j] = s;
                        h[j * d + i] = s;
                    }
                }
                Ok(h)
            }
        }
    }

    fn table_bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if let WeightFamily::TabulatedOnGrid {
            origin,
            spacing,
            shape,
            ..
        } = self
        {
            let hi = origin
                .iter()
                .zip(shape)
                .map(|(o, &n)| o + spacing * (n - 1) as f64)
                .collect();
            Some((origin.clone(), hi))
        } else {
            None
        }
    }

    /// Central difference points along axis `j`, pulled inside the table.
    fn stencil(&self, x: &[f64], j: usize, step: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let mut lo = x.to_vec();
        let mut hi = x.to_vec();
        lo[j] -= step;
        hi[j] += step;
        if let Some((tlo, thi)) = self.table_bounds() {
            lo[j] = lo[j].max(tlo[j]);
            hi[j] = hi[j].min(thi[j]);
        }
        let width = hi[j] - lo[j];
        (lo, hi, width)
    }

    fn finite_difference(
        &self,
        x: &[f64],
        step: f64,
        f: impl Fn(&[f64]) -> Result<f64>,
    ) -> Result<Vec<f64>> {
        (0..x.len())
            .map(|j| {
                let (lo, hi, width) = self.stencil(x, j, step);
                if width <= 0.0 {
                    return Err(eval_err(x, "finite-difference stencil collapsed"));
                }
                Ok((f(&hi)? - f(&lo)?) / width)
            })
            .collect()
    }

    fn interpolate(&self, x: &[f64]) -> Result<f64> {
        let WeightFamily::TabulatedOnGrid {
            origin,
            spacing,
            shape,
            values,
        } = self
        else {
            unreachable!("interpolate on a non-tabulated family")
        };
        let d = shape.len();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for j in 0..d {
            let t = (x[j] - origin[j]) / spacing;
            let last = (shape[j] - 1) as f64;
            if !(t >= -1e-9 && t <= last + 1e-9) {
                return Err(eval_err(x, "outside the tabulated grid"));
            }
            let t = t.clamp(0.0, last);
            let k = (t.floor() as usize).min(shape[j] - 2);
            base.push(k);
            frac.push(t - k as f64);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut id = 0;
            let mut stride = 1;
            for j in 0..d {
                let bit = (corner >> j) & 1;
                w *= if bit == 1 { frac[j] } else { 1.0 - frac[j] };
                id += (base[j] + bit) * stride;
                stride *= shape[j];
            }
            if w != 0.0 {
                acc += w * values[id];
            }
        }
        Ok(acc)
    }
}

impl WeightSpec {
    pub fn new(family: WeightFamily, dimension: usize) -> Result<Self> {
        let spec = WeightSpec {
            family,
            dimension,
            tau0: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(dimension: usize) -> Self {
        WeightSpec {
            family: WeightFamily::Constant { value: 0.0 },
            dimension,
            tau0: None,
        }
    }

    pub fn power(alpha: f64, dimension: usize) -> Result<Self> {
        Self::new(WeightFamily::Power { alpha }, dimension)
    }

    pub fn gaussian(dimension: usize) -> Self {
        WeightSpec {
            family: WeightFamily::Gaussian,
            dimension,
            tau0: None,
        }
    }

    pub fn exponential(alpha: f64, dimension: usize) -> Result<Self> {
        Self::new(WeightFamily::Exponential { alpha }, dimension)
    }

    pub fn linear_combination(terms: Vec<WeightTerm>, dimension: usize) -> Result<Self> {
        Self::new(WeightFamily::LinearCombination { terms }, dimension)
    }

    pub fn with_tau0(mut self, tau0: f64) -> Self {
        self.tau0 = Some(tau0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return input("dimension must be positive");
        }
        if let Some(t) = self.tau0 {
            if !(t >= 0.0) {
                return input("tau0 must be nonnegative");
            }
        }
        self.family.validate(self.dimension)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: WeightSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn tau0(&self) -> f64 {
        self.tau0.unwrap_or_else(|| self.family.default_tau0())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return input(format!(
                "point of dimension {} for a weight on R^{}",
                x.len(),
                self.dimension
            ));
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let v = self.family.value(x)?;
        if v.is_nan() {
            return Err(eval_err(x, "phi evaluated to NaN"));
        }
        Ok(v)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let g = self.family.gradient(x)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(eval_err(x, "gradient is not finite"));
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.family.hessian(x)
    }

    /// Spectral norm of the Hessian.
    pub fn hessian_norm(&self, x: &[f64]) -> Result<f64> {
        let d = self.dimension;
        let h = self.hessian(x)?;
        if h.iter().any(|v| !v.is_finite()) {
            return Err(eval_err(x, "Hessian is not finite"));
        }
        if d == 1 {
            return Ok(h[0].abs());
        }
        let m = DMatrix::from_row_slice(d, d, &h);
        let eig = SymmetricEigen::new(m);
        Ok(eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())))
    }

    /// `m(x) = 1 + |grad phi(x)|`.
    pub fn conformal_factor(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 + norm(&self.gradient(x)?))
    }

    /// `|grad m(x)|` by central differences of `m`.
    pub fn conformal_gradient_norm(&self, x: &[f64]) -> Result<f64> {
        let step = 1e-6 * (1.0 + norm(x));
        let mut acc = 0.0;
        let mut y = x.to_vec();
        for j in 0..x.len() {
            y[j] = x[j] + step;
            let hi = self.conformal_factor(&y)?;
            y[j] = x[j] - step;
            let lo = self.conformal_factor(&y)?;
            y[j] = x[j];
            let dj = (hi - lo) / (2.0 * step);
            acc += dj * dj;
        }
        Ok(acc.sqrt())
    }

    /// `x/|x| . grad phi(x)`; zero at the origin.
    pub fn radial_derivative(&self, x: &[f64]) -> Result<f64> {
        let r = norm(x);
        if r == 0.0 {
            return Ok(0.0);
        }
        let g = self.gradient(x)?;
        Ok(g.iter().zip(x).map(|(gi, xi)| gi * xi / r).sum())
    }

    /// Density `e^{sign phi(x)}` of the measure.
    pub fn density(&self, sign: Sign, x: &[f64]) -> Result<f64> {
        Ok((sign.factor() * self.value(x)?).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(spec: &WeightSpec, x: &[f64]) -> Vec<f64> {
        let e = 1e-6;
        (0..x.len())
            .map(|j| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[j] += e;
                b[j] -= e;
                (spec.value(&a).unwrap() - spec.value(&b).unwrap()) / (2.0 * e)
            })
            .collect()
    }

    #[test]
    fn closed_form_gradients_match_finite_differences() {
        let specs = [
            WeightSpec::power(2.0, 2).unwrap(),
            WeightSpec::power(1.5, 3).unwrap(),
            WeightSpec::exponential(1.0, 2).unwrap(),
            WeightSpec::gaussian(2),
        ];
        let x = [0.7, -0.4, 0.3];
        for spec in &specs {
            let p = &x[..spec.dimension];
            let g = spec.gradient(p).unwrap();
            let fd = fd_gradient(spec, p);
            for (a, b) in g.iter().zip(&fd) {
                assert!(
                    (a - b).abs() < 1e-6 * (1.0 + a.abs()),
                    "{spec:?}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn hessian_of_power_has_radial_and_tangential_eigenvalues() {
        let spec = WeightSpec::power(3.0, 2).unwrap();
        // at |x| = 2: radial 3*2*2 = 12, tangential 3*2 = 6
        let n = spec.hessian_norm(&[2.0, 0.0]).unwrap();
        assert!((n - 12.0).abs() < 1e-12);
        let g = spec.hessian(&[0.0, 2.0]).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-12 && (g[3] - 12.0).abs() < 1e-12);
    }

    #[test]
    fn origin_behaviour() {
        assert!(WeightSpec::power(0.5, 1).unwrap().gradient(&[0.0]).is_err());
        assert_eq!(
            WeightSpec::power(1.0, 1).unwrap().gradient(&[0.0]).unwrap(),
            vec![0.0]
        );
        assert!(WeightSpec::power(1.5, 1).unwrap().hessian(&[0.0]).is_err());
        assert_eq!(
            WeightSpec::gaussian(2).hessian(&[0.0, 0.0]).unwrap(),
            vec![2.0, 0.0, 0.0, 2.0]
        );
    }

    #[test]
    fn tau0_defaults() {
        assert_eq!(WeightSpec::power(2.0, 1).unwrap().tau0(), 0.0);
        assert_eq!(WeightSpec::power(1.5, 1).unwrap().tau0(), 1.0);
        assert_eq!(
            WeightSpec::power(1.5, 1).unwrap().with_tau0(0.5).tau0(),
            0.5
        );
    }

    #[test]
    fn json_schema() {
        let spec = WeightSpec::from_json(r#"{"family":"power","alpha":2,"dimension":2,"tau0":0}"#)
            .unwrap();
        assert_eq!(spec.family, WeightFamily::Power { alpha: 2.0 });
        assert_eq!(spec.tau0(), 0.0);
        let combo = WeightSpec::from_json(
            r#"{"family":"linear-combination","dimension":1,
                "terms":[{"coefficient":0.5,"family":"power","alpha":2}]}"#,
        )
        .unwrap();
        assert!((combo.conformal_factor(&[3.0]).unwrap() - 4.0).abs() < 1e-12);
        let back: WeightSpec =
            serde_json::from_str(&serde_json::to_string(&combo).unwrap()).unwrap();
        assert_eq!(back, combo);
        assert!(WeightSpec::from_json(r#"{"family":"power","alpha":-1,"dimension":1}"#).is_err());
    }

    #[test]
    fn tabulated_matches_source_function() {
        // phi = x^2 + y^2 tabulated on [-2,2]^2
        let n = 81;
        let h = 4.0 / (n - 1) as f64;
        let mut values = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let x = -2.0 + i as f64 * h;
                let y = -2.0 + j as f64 * h;
                values.push(x * x + y * y);
            }
        }
        let spec = WeightSpec::new(
            WeightFamily::TabulatedOnGrid {
                origin: vec![-2.0, -2.0],
                spacing: h,
                shape: vec![n, n],
                values,
            },
            2,
        )
        .unwrap();
        let x = [0.33, -1.21];
        assert!((spec.value(&x).unwrap() - (0.33f64.powi(2) + 1.21f64.powi(2))).abs() < 2e-3);
        let g = spec.gradient(&x).unwrap();
        assert!((g[0] - 0.66).abs() < 0.06 && (g[1] + 2.42).abs() < 0.06);
        assert!((spec.hessian_norm(&x).unwrap() - 2.0).abs() < 0.1);
        assert!(spec.value(&[3.0, 0.0]).is_err());
    }

    #[test]
    fn conformal_factor_at_least_one() {
        let spec = WeightSpec::exponential(2.0, 2).unwrap();
        for x in [[0.0, 0.0], [1.0, 2.0], [-0.5, 0.1]] {
            assert!(spec.conformal_factor(&x).unwrap() >= 1.0);
        }
    }
}
