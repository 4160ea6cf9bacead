use thiserror::Error;

use crate::model::{LocusId, RegionId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown region `{0}`")]
    UnknownRegion(RegionId),

    #[error("unknown branch locus `{0}`")]
    UnknownLocus(LocusId),

    #[error("region `{0}` has a boundary circle that is not attached to any branch locus")]
    UnattachedBoundary(RegionId),

    #[error("surface is invalid: {0}")]
    Invalid(String),

    #[error("operation requires a strict-mode surface")]
    RequiresStrict,

    #[error("operation requires a minor-mode surface")]
    RequiresMinor,

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("invalid fixture parameters: {0}")]
    FixtureParameters(String),

    #[error("size budget {budget} is too small (a strict surface needs at least {minimum} cells)")]
    BudgetTooSmall { budget: usize, minimum: usize },

    #[error("region `{region}` is not an IX site: {reason}")]
    IneligibleIx { region: RegionId, reason: String },

    #[error("XI choice at `{locus}` is not available: {reason}")]
    IneligibleXi { locus: LocusId, reason: String },

    #[error("region `{0}` is not maximally spread")]
    NotMaximallySpread(RegionId),

    /// The merged locus of an IH site did not admit exactly two XI-moves.
    /// This contradicts the move calculus and indicates a bug.
    #[error("merged locus `{locus}` admits {found} XI-moves, expected exactly 2")]
    ExactlyTwoViolated { locus: LocusId, found: usize },

    #[error("no XI choice at the merged locus reproduces the input surface")]
    InverseNotFound,

    #[error("region `{0}` cannot be contracted")]
    IneligibleContraction(RegionId),

    #[error("move record does not replay: {0}")]
    Replay(String),

    #[error("JSON error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation ({rule}) at line {line}, column {column}: {message}")]
    Schema {
        rule: String,
        message: String,
        line: usize,
        column: usize,
    },
}
