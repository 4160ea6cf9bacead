//! JSON shapes written by the subcommands.

use std::fmt;
use std::path::PathBuf;

use mbs_core::algebra::{DecompositionSummary, HomologyGroup, HomologyProfile};
use mbs_core::model::{LocusId, LocusProfile, RegionClass};
use mbs_core::moves::{IxSite, XiChoice};
use mbs_core::{Error, IsoCertificate, SymmetryMode, ValidityMode, Violation};
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io { path: PathBuf, message: String },
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

pub fn error_json(e: &CliError) -> String {
    let mut body = ErrorBody {
        kind: "input",
        message: e.to_string(),
        rule: None,
        line: None,
        column: None,
    };
    match e {
        CliError::Core(Error::Json { line, column, .. }) => {
            body.kind = "json";
            body.line = Some(*line);
            body.column = Some(*column);
        }
        CliError::Core(Error::Schema { rule, line, column, .. }) => {
            body.kind = "schema";
            body.rule = Some(rule);
            body.line = Some(*line);
            body.column = Some(*column);
        }
        CliError::Io { .. } => body.kind = "io",
        CliError::Usage(_) => body.kind = "usage",
        CliError::Core(_) => {}
    }
    to_json(&ErrorDoc { error: body })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs always serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct ViolationEntry {
    #[serde(flatten)]
    pub violation: Violation,
    pub message: String,
}

#[derive(Serialize)]
pub struct ValidateReport {
    pub valid: bool,
    pub mode: ValidityMode,
    pub violations: Vec<ViolationEntry>,
}

#[derive(Serialize)]
pub struct GroupEntry {
    pub betti: usize,
    pub torsion: Vec<u64>,
    pub display: String,
}

impl From<&HomologyGroup> for GroupEntry {
    fn from(g: &HomologyGroup) -> Self {
        GroupEntry {
            betti: g.betti,
            torsion: g.torsion.clone(),
            display: g.to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct HomologyEntry {
    pub h0: GroupEntry,
    pub h1: GroupEntry,
    pub h2: GroupEntry,
}

impl From<&HomologyProfile> for HomologyEntry {
    fn from(p: &HomologyProfile) -> Self {
        HomologyEntry {
            h0: (&p.h0).into(),
            h1: (&p.h1).into(),
            h2: (&p.h2).into(),
        }
    }
}

#[derive(Serialize)]
pub struct LocusEntry {
    pub id: LocusId,
    #[serde(flatten)]
    pub profile: LocusProfile,
}

#[derive(Serialize)]
pub struct RegionEntry {
    pub id: String,
    pub class: Option<RegionClass>,
}

#[derive(Serialize)]
pub struct InvariantsReport {
    pub mode: ValidityMode,
    pub cell_count: usize,
    pub euler_characteristic: i64,
    pub connected_components: usize,
    pub homology: HomologyEntry,
    pub canonical_hash: String,
    pub loci: Vec<LocusEntry>,
    pub regions: Vec<RegionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_euler: Option<i64>,
}

#[derive(Serialize)]
pub struct MovesReport {
    pub ix: Vec<IxSite>,
    pub xi: Vec<XiChoice>,
    pub spread_potential: u64,
    pub maximally_spread: bool,
}

#[derive(Serialize)]
pub struct IsoReport {
    pub isomorphic: bool,
    pub symmetry: SymmetryMode,
    pub canonical_hashes: [String; 2],
    pub certificate: Option<IsoCertificate>,
}

#[derive(Serialize)]
pub struct MinorReport {
    pub symmetry: SymmetryMode,
    #[serde(flatten)]
    pub outcome: mbs_core::minors::MinorOutcome,
}
