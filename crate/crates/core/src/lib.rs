//! Conformal weighted metric measure spaces `(R^d, rho_phi, e^{+-phi} dx)`
//! at desk scale: lattice discretization, Christ dyadic cubes, boundary
//! layers and isoperimetric constants, and the BMO / H^1 toolkit (norms,
//! sharp and dyadic maximal functions, atomic decompositions, gluing of
//! local representatives, singular-integral kernel constants).

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod christ_cubes;
pub mod discrete_space;
pub mod error;
pub mod experiment;
pub mod function_spaces;
pub mod isoperimetry;
pub mod region;
pub mod stats;
pub mod weight_spaces;

pub use discrete_space::{FiniteMetricMeasureSpace, GeometryParams};
pub use error::{Error, Result};
pub use region::{BoxRegion, EuclideanBall, Region};
pub use weight_spaces::{Sign, WeightSpec};
