//! Exact integer linear algebra and cellular homology.

pub mod homology;
pub mod matrix;

pub use homology::{
    boundary_euler, build_chain_complex, decomposition_summary, homology_profile, ChainComplex, DecompositionSummary,
    HomologyGroup, HomologyProfile,
};
pub use matrix::{smith_normal_form, IntegerMatrix, SmithDecomposition};
