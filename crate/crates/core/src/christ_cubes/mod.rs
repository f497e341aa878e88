//! Christ dyadic cubes on finite metric measure spaces, net chains and the
//! covering multiplicity of net balls.

pub mod axioms;
pub mod chain;
pub mod nets;
pub mod tree;

pub use axioms::{verify_cube_axioms, AxiomCheck, CubeAxiomReport};
pub use chain::{
    audit_chain, build_chain, chain_length_bound, covering_multiplicity, Chain, ChainAudit,
    ChainParams, CoveringReport,
};
pub use nets::{auto_levels, build_nets, NetAudit, NetHierarchy};
pub use tree::{build_cubes, Cube, CubeLevel, DyadicCubeTree};
