//! Weights `phi` on R^d and the conformal geometry they induce: the factor
//! `m = 1 + |grad phi|`, the length metric `rho_phi` and the measures
//! `e^{+-phi} dx`.

pub mod admissible;
pub mod geodesic;
pub mod integral_lemma;
pub mod mass;
pub mod spec;

pub use admissible::{
    check_admissible, check_tame, AdmissibilityReport, TamenessReport, GROWTH_LIMIT,
    HESSIAN_RATIO_THRESHOLD, RADIAL_RATIO_THRESHOLD,
};
pub use geodesic::{geodesic_distance, segment_length, GeodesicEstimate};
pub use integral_lemma::{
    verify_integral_lemma, IntegralLemmaReport, QuadratureConfig, TailDirection,
};
pub use mass::weighted_mass;
pub use spec::{Sign, WeightFamily, WeightSpec, WeightTerm};
