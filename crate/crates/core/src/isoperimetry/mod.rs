//! Boundary layers, the complementary isoperimetric constant, exponential
//! layer growth and complement decay, and disjoint boundary cube selection.

pub mod covering_select;
pub mod estimate;
pub mod families;
pub mod growth;
pub mod layers;

pub use covering_select::{
    candidate_cubes, covering_fraction, covering_select, CoveringSelection, SelectedCube,
};
pub use estimate::{estimate_isoperimetric, CurvePoint, IsoperimetryReport};
pub use families::{annuli, random_cube_unions, slabs, FamilyKind, TestSet};
pub use growth::{
    verify_complement_decay, verify_layer_growth, DecayReport, GrowthMode, GrowthReport, GrowthRow,
};
pub use layers::{
    boundary_layer, connectivity_scale, default_b0, distance_to_complement, resolved_kappa_grid,
    Ball,
};
