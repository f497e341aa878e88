//! BMO and Hardy space machinery on a finite metric measure space.

pub mod atoms;
pub mod balls;
pub mod bmo;
pub mod decompose;
pub mod duality;
pub mod glue;
pub mod jn;
pub mod kernel;
pub mod maximal;
pub mod rdi;
pub mod suite;

pub use atoms::{random_atom, Atom, AtomCheck, ATOM_TOLERANCE};
pub use balls::{BallFamily, BallRef};
pub use bmo::{
    bmo_norm, bmo_norm_on, direct_oscillation, oscillations, sharp_function, sharp_function_on,
    verify_scale_independence, BmoResult, ScaleReport,
};
pub use decompose::{atomic_decompose, Decomposition, Term};
pub use duality::{conjugate, duality_check, DualityPair};
pub use glue::{glue_representatives, BallCorrection, GlueReport, LocalRepresentative};
pub use jn::{default_s_grid, john_nirenberg_profile, JnProfile};
pub use kernel::{
    atom_image_check, hormander_constants, l2_operator_norm, AtomImageReport, KernelConstants,
    KernelMatrix, OperatorNorm,
};
pub use maximal::{
    dyadic_maximal, resolution_two_level, weak_type_constant, weak_type_ratio, WeakTypeReport,
};
pub use rdi::{
    default_alpha_grid, fefferman_stein_check, fefferman_stein_ratio, rdi_check,
    FeffermanSteinReport, RdiParams, RdiReport, RdiRow,
};
