//! The `mbs/1` JSON interchange format.
//!
//! ```json
//! {
//!   "format": "mbs/1",
//!   "mode": "strict",
//!   "regions": [{"id": "R1", "orientable": true, "genus": 0, "boundaries": ["a1", "b1"]}],
//!   "loci": [{"id": "B1", "wrapping": 1, "slots": ["a1", "a2", "a3"]}],
//!   "reversed": ["a1"]
//! }
//! ```
//!
//! Keys are written in the order shown. `reversed` lists the circles attached
//! against their locus and is omitted when empty. Unknown keys are rejected. Slot
//! lists are kept verbatim, basepoint included.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BranchLocus, MultibranchedSurface, Region, ValidityMode};

pub const FORMAT: &str = "mbs/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDocument {
    pub format: String,
    pub mode: ValidityMode,
    pub regions: Vec<RegionEntry>,
    pub loci: Vec<LocusEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reversed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionEntry {
    pub id: String,
    pub orientable: bool,
    pub genus: u32,
    pub boundaries: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocusEntry {
    pub id: String,
    pub wrapping: u32,
    pub slots: Vec<String>,
}

impl From<&MultibranchedSurface> for SurfaceDocument {
    fn from(x: &MultibranchedSurface) -> Self {
        SurfaceDocument {
            format: FORMAT.to_owned(),
            mode: x.mode,
            regions: x
                .regions
                .iter()
                .map(|r| RegionEntry {
                    id: r.id.to_string(),
                    orientable: r.orientable,
                    genus: r.genus,
                    boundaries: r.boundaries.iter().map(ToString::to_string).collect(),
                })
                .collect(),
            loci: x
                .loci
                .iter()
                .map(|l| LocusEntry {
                    id: l.id.to_string(),
                    wrapping: l.wrapping,
                    slots: l.slots.iter().map(ToString::to_string).collect(),
                })
                .collect(),
            reversed: x.reversed.iter().map(ToString::to_string).collect(),
        }
    }
}

impl SurfaceDocument {
    pub fn into_surface(self) -> MultibranchedSurface {
        MultibranchedSurface::new(
            self.mode,
            self.regions
                .into_iter()
                .map(|r| Region::new(r.id, r.orientable, r.genus, r.boundaries))
                .collect(),
            self.loci
                .into_iter()
                .map(|l| BranchLocus::new(l.id, l.wrapping, l.slots))
                .collect(),
        )
        .with_reversed(self.reversed)
    }
}

/// 1-based line and column of the `nth` occurrence of `needle`, or of the
/// start of the text if there is none.
fn locate(text: &str, needle: &str, nth: usize) -> (usize, usize) {
    let Some((offset, _)) = text.match_indices(needle).nth(nth) else {
        return (1, 1);
    };
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn schema(text: &str, rule: &str, message: String, needle: &str, nth: usize) -> Error {
    let (line, column) = locate(text, needle, nth);
    Error::Schema {
        rule: rule.to_owned(),
        message,
        line,
        column,
    }
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_default()
}

/// Parses a document and checks the schema rules (format tag, positive
/// wrapping numbers, unique ids and circles, known reversed circles). Topological validity is left
/// to [`MultibranchedSurface::validate`].
pub fn parse(bytes: &[u8]) -> Result<MultibranchedSurface> {
    let doc: SurfaceDocument = serde_json::from_slice(bytes).map_err(|e| Error::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let text = String::from_utf8_lossy(bytes);

    if doc.format != FORMAT {
        return Err(schema(
            &text,
            "format",
            format!("format must be \"{FORMAT}\", found {}", quoted(&doc.format)),
            "\"format\"",
            0,
        ));
    }
    for (i, l) in doc.loci.iter().enumerate() {
        if l.wrapping == 0 {
            return Err(schema(
                &text,
                "wrapping_positive",
                format!("locus {} has wrapping number 0", l.id),
                "\"wrapping\"",
                i,
            ));
        }
    }
    let mut ids = HashSet::new();
    for r in &doc.regions {
        if !ids.insert(&r.id) {
            return Err(schema(
                &text,
                "unique_region_id",
                format!("duplicate region id {}", r.id),
                &quoted(&r.id),
                1,
            ));
        }
    }
    let mut ids = HashSet::new();
    for l in &doc.loci {
        if !ids.insert(&l.id) {
            return Err(schema(
                &text,
                "unique_locus_id",
                format!("duplicate locus id {}", l.id),
                &quoted(&l.id),
                1,
            ));
        }
    }
    let mut circles: HashSet<&String> = HashSet::new();
    for r in &doc.regions {
        for c in &r.boundaries {
            if !circles.insert(c) {
                return Err(schema(
                    &text,
                    "unique_circle",
                    format!("circle {c} appears on more than one boundary"),
                    &quoted(c),
                    1,
                ));
            }
        }
    }
    for (i, c) in doc.reversed.iter().enumerate() {
        if !circles.contains(c) {
            return Err(schema(
                &text,
                "known_circle",
                format!("reversed circle {c} is not a boundary circle"),
                "\"reversed\"",
                0,
            ));
        }
        if doc.reversed[..i].contains(c) {
            return Err(schema(
                &text,
                "unique_circle",
                format!("circle {c} is reversed twice"),
                "\"reversed\"",
                0,
            ));
        }
    }
    Ok(doc.into_surface())
}

pub fn parse_str(text: &str) -> Result<MultibranchedSurface> {
    parse(text.as_bytes())
}

/// Pretty-printed document with a trailing newline.
pub fn serialize(x: &MultibranchedSurface) -> String {
    let mut s = serde_json::to_string_pretty(&SurfaceDocument::from(x)).expect("documents always serialize");
    s.push('\n');
    s
}
