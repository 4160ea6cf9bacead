//! Multibranched surfaces: model, homology, local moves, isomorphism,
//! move-sequence search and minors.

pub mod algebra;
pub mod document;
pub mod error;
pub mod fixtures;
pub mod iso;
pub mod minors;
pub mod model;
pub mod moves;
pub mod search;

pub use error::{Error, Result};
pub use iso::{
    are_isomorphic, canonical_form, canonical_hash, CanonicalForm, IsoCertificate, LocusMatch, RegionMatch,
    SymmetryMode,
};
pub use model::{
    BranchLocus, CircleId, LocusId, MultibranchedSurface, Region, RegionClass, RegionId, ValidationReport,
    ValidityMode, Violation,
};
pub use moves::{Move, MoveRecord, XiChoice, XiSplit};
pub use search::{SearchBudget, SearchOutcome};
