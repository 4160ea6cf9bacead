//! The combinatorial data model.
//!
//! A multibranched surface is stored as a list of regions (compact surfaces,
//! identified by topology and an ordered list of boundary circles) and a list
//! of branch loci. Each locus carries one wrapping number `w` and a cyclic
//! sequence of slots; every slot holds one boundary circle that covers the
//! locus `w` times. The degree `d = w * k` is always derived from the slot
//! count `k`, so regularity (`w | d`) holds by construction.
//!
//! Besides the cyclic slot order, the only attaching data kept is a sign per
//! circle of an orientable region: the circle either runs along the locus
//! direction (the default) or against it, in which case it is listed in
//! [`MultibranchedSurface::reversed`]. Circles of non-orientable regions carry
//! no sign, since sliding a boundary circle around a crosscap reverses it.
//! Slopes of the attaching curves are not stored.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Identifier of a region.
    RegionId
);
string_id!(
    /// Identifier of a branch locus.
    LocusId
);
string_id!(
    /// Identifier of a boundary circle. Unique across the whole surface.
    CircleId
);

/// Which set of validity rules applies.
///
/// `Strict` is the setting of the move calculus: every locus has degree at
/// least 3 and every region has non-empty boundary, all of it attached.
/// `Minor` relaxes this for the minor calculus: degrees 1 and 2 are allowed,
/// regions may be closed and boundary circles may be left unattached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidityMode {
    Strict,
    Minor,
}

impl fmt::Display for ValidityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityMode::Strict => f.write_str("strict"),
            ValidityMode::Minor => f.write_str("minor"),
        }
    }
}

/// Topological type of a compact surface. `genus` is the crosscap number
/// when the surface is non-orientable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionTopology {
    pub orientable: bool,
    pub genus: u32,
    pub boundary_count: u32,
}

impl RegionTopology {
    pub fn euler(&self) -> i64 {
        let g = self.genus as i64;
        let b = self.boundary_count as i64;
        if self.orientable {
            2 - 2 * g - b
        } else {
            2 - g - b
        }
    }

    pub fn is_disk(&self) -> bool {
        self.orientable && self.genus == 0 && self.boundary_count == 1
    }

    pub fn is_annulus(&self) -> bool {
        self.orientable && self.genus == 0 && self.boundary_count == 2
    }

    pub fn is_moebius(&self) -> bool {
        !self.orientable && self.genus == 1 && self.boundary_count == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub id: RegionId,
    pub orientable: bool,
    pub genus: u32,
    pub boundaries: Vec<CircleId>,
}

impl Region {
    pub fn new(
        id: impl Into<RegionId>,
        orientable: bool,
        genus: u32,
        boundaries: impl IntoIterator<Item = impl Into<CircleId>>,
    ) -> Self {
        Region {
            id: id.into(),
            orientable,
            genus,
            boundaries: boundaries.into_iter().map(Into::into).collect(),
        }
    }

    pub fn annulus(id: impl Into<RegionId>, a: impl Into<CircleId>, b: impl Into<CircleId>) -> Self {
        Region::new(id, true, 0, [a.into(), b.into()])
    }

    pub fn moebius(id: impl Into<RegionId>, c: impl Into<CircleId>) -> Self {
        Region::new(id, false, 1, [c.into()])
    }

    pub fn topology(&self) -> RegionTopology {
        RegionTopology {
            orientable: self.orientable,
            genus: self.genus,
            boundary_count: self.boundaries.len() as u32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BranchLocus {
    pub id: LocusId,
    pub wrapping: u32,
    /// Cyclic order; the first element is an arbitrary basepoint.
    pub slots: Vec<CircleId>,
}

impl BranchLocus {
    pub fn new(id: impl Into<LocusId>, wrapping: u32, slots: impl IntoIterator<Item = impl Into<CircleId>>) -> Self {
        BranchLocus {
            id: id.into(),
            wrapping,
            slots: slots.into_iter().map(Into::into).collect(),
        }
    }

    pub fn component_count(&self) -> usize {
        self.slots.len()
    }

    pub fn degree(&self) -> u64 {
        self.wrapping as u64 * self.slots.len() as u64
    }

    pub fn is_normal(&self) -> bool {
        self.wrapping == 1
    }

    pub fn is_pure(&self) -> bool {
        self.slots.len() == 1
    }

    pub fn is_spreadable(&self) -> bool {
        let tribranched = self.degree() == 3;
        !(self.is_normal() && tribranched) && !self.is_pure()
    }
}

/// Record returned by [`MultibranchedSurface::locus_profile`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocusProfile {
    pub degree: u64,
    pub wrapping: u32,
    pub component_count: usize,
    pub is_normal: bool,
    pub is_pure: bool,
    pub is_tribranched: bool,
    pub is_spreadable: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    NormalAnnulus,
    QuasiNormalAnnulus,
    UnnormalAnnulus,
    ClosingAnnulus,
    NormalMoebius,
    UnnormalMoebius,
    Other,
}

impl RegionClass {
    /// Classes along which an IX-move (or a minor contraction) is defined.
    pub fn is_contractible(self) -> bool {
        matches!(
            self,
            RegionClass::NormalAnnulus | RegionClass::QuasiNormalAnnulus | RegionClass::NormalMoebius
        )
    }
}

/// A single failed validity rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    DuplicateRegionId { region: RegionId },
    DuplicateLocusId { locus: LocusId },
    DuplicateBoundaryCircle { circle: CircleId },
    DiskRegion { region: RegionId },
    NonOrientableGenusZero { region: RegionId },
    ClosedRegion { region: RegionId },
    ZeroWrapping { locus: LocusId },
    EmptyLocus { locus: LocusId },
    DegreeTooSmall { locus: LocusId, degree: u64 },
    DanglingSlot { locus: LocusId, circle: CircleId },
    SlotReused { circle: CircleId },
    UnattachedCircle { region: RegionId, circle: CircleId },
    MisplacedReversal { circle: CircleId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateRegionId { region } => write!(f, "duplicate region id {region}"),
            Violation::DuplicateLocusId { locus } => write!(f, "duplicate locus id {locus}"),
            Violation::DuplicateBoundaryCircle { circle } => {
                write!(f, "circle {circle} bounds more than one region")
            }
            Violation::DiskRegion { region } => write!(f, "disk region {region}"),
            Violation::NonOrientableGenusZero { region } => {
                write!(f, "non-orientable region {region} has crosscap number 0")
            }
            Violation::ClosedRegion { region } => {
                write!(f, "closed region {region} is only allowed in minor mode")
            }
            Violation::ZeroWrapping { locus } => write!(f, "locus {locus} has wrapping number 0"),
            Violation::EmptyLocus { locus } => write!(f, "locus {locus} has no slots"),
            Violation::DegreeTooSmall { locus, degree } => {
                write!(f, "locus {locus}: locus degree {degree} < 3")
            }
            Violation::DanglingSlot { locus, circle } => {
                write!(f, "locus {locus} refers to unknown circle {circle}")
            }
            Violation::SlotReused { circle } => write!(f, "circle {circle} fills more than one slot"),
            Violation::UnattachedCircle { region, circle } => {
                write!(f, "boundary circle {circle} of region {region} is not attached")
            }
            Violation::MisplacedReversal { circle } => {
                write!(
                    f,
                    "reversed circle {circle} must fill a slot and bound an orientable region"
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Where a boundary circle lives.
#[derive(Clone, Debug, Default)]
pub(crate) struct Incidence {
    /// circle -> index of the region it bounds
    pub region_of: HashMap<CircleId, usize>,
    /// circle -> (locus index, slot position)
    pub slot_of: HashMap<CircleId, (usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultibranchedSurface {
    pub mode: ValidityMode,
    pub regions: Vec<Region>,
    pub loci: Vec<BranchLocus>,
    /// Circles attached against the direction of their locus.
    pub reversed: BTreeSet<CircleId>,
}

impl MultibranchedSurface {
    pub fn new(mode: ValidityMode, regions: Vec<Region>, loci: Vec<BranchLocus>) -> Self {
        MultibranchedSurface {
            mode,
            regions,
            loci,
            reversed: BTreeSet::new(),
        }
    }

    pub fn with_reversed(mut self, circles: impl IntoIterator<Item = impl Into<CircleId>>) -> Self {
        self.reversed.extend(circles.into_iter().map(Into::into));
        self
    }

    /// `-1` for a reversed circle, `1` otherwise.
    pub fn sign(&self, c: &CircleId) -> i64 {
        if self.reversed.contains(c) {
            -1
        } else {
            1
        }
    }

    pub fn empty(mode: ValidityMode) -> Self {
        Self::new(mode, Vec::new(), Vec::new())
    }

    /// Same data, reinterpreted under another set of validity rules.
    pub fn with_mode(&self, mode: ValidityMode) -> Self {
        MultibranchedSurface { mode, ..self.clone() }
    }

    pub fn region(&self, id: &RegionId) -> Option<&Region> {
        self.regions.iter().find(|r| &r.id == id)
    }

    pub fn locus(&self, id: &LocusId) -> Option<&BranchLocus> {
        self.loci.iter().find(|l| &l.id == id)
    }

    pub(crate) fn region_index(&self, id: &RegionId) -> Result<usize> {
        self.regions
            .iter()
            .position(|r| &r.id == id)
            .ok_or_else(|| Error::UnknownRegion(id.clone()))
    }

    pub(crate) fn locus_index(&self, id: &LocusId) -> Result<usize> {
        self.loci
            .iter()
            .position(|l| &l.id == id)
            .ok_or_else(|| Error::UnknownLocus(id.clone()))
    }

    pub(crate) fn incidence(&self) -> Incidence {
        let mut inc = Incidence::default();
        for (ri, r) in self.regions.iter().enumerate() {
            for c in &r.boundaries {
                inc.region_of.entry(c.clone()).or_insert(ri);
            }
        }
        for (li, l) in self.loci.iter().enumerate() {
            for (pos, c) in l.slots.iter().enumerate() {
                inc.slot_of.entry(c.clone()).or_insert((li, pos));
            }
        }
        inc
    }

    /// Size measure used for budgets: regions + loci + slots.
    pub fn cell_count(&self) -> usize {
        self.regions.len() + self.loci.len() + self.loci.iter().map(|l| l.slots.len()).sum::<usize>()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let strict = self.mode == ValidityMode::Strict;

        let mut seen = HashSet::new();
        for r in &self.regions {
            if !seen.insert(&r.id) {
                v.push(Violation::DuplicateRegionId { region: r.id.clone() });
            }
        }
        let mut seen = HashSet::new();
        for l in &self.loci {
            if !seen.insert(&l.id) {
                v.push(Violation::DuplicateLocusId { locus: l.id.clone() });
            }
        }

        let mut circles = HashSet::new();
        for r in &self.regions {
            let topo = r.topology();
            if !r.orientable && r.genus == 0 {
                v.push(Violation::NonOrientableGenusZero { region: r.id.clone() });
            }
            if topo.is_disk() {
                v.push(Violation::DiskRegion { region: r.id.clone() });
            }
            if strict && topo.boundary_count == 0 {
                v.push(Violation::ClosedRegion { region: r.id.clone() });
            }
            for c in &r.boundaries {
                if !circles.insert(c) {
                    v.push(Violation::DuplicateBoundaryCircle { circle: c.clone() });
                }
            }
        }

        let mut filled = HashSet::new();
        for l in &self.loci {
            if l.wrapping == 0 {
                v.push(Violation::ZeroWrapping { locus: l.id.clone() });
            }
            if l.slots.is_empty() {
                v.push(Violation::EmptyLocus { locus: l.id.clone() });
            } else if strict && l.degree() < 3 {
                v.push(Violation::DegreeTooSmall {
                    locus: l.id.clone(),
                    degree: l.degree(),
                });
            }
            for c in &l.slots {
                if !circles.contains(c) {
                    v.push(Violation::DanglingSlot {
                        locus: l.id.clone(),
                        circle: c.clone(),
                    });
                }
                if !filled.insert(c) {
                    v.push(Violation::SlotReused { circle: c.clone() });
                }
            }
        }

        if strict {
            for r in &self.regions {
                for c in &r.boundaries {
                    if !filled.contains(c) {
                        v.push(Violation::UnattachedCircle {
                            region: r.id.clone(),
                            circle: c.clone(),
                        });
                    }
                }
            }
        }

        let inc = self.incidence();
        for c in &self.reversed {
            let orientable = inc.region_of.get(c).is_some_and(|&ri| self.regions[ri].orientable);
            if !orientable || !filled.contains(c) {
                v.push(Violation::MisplacedReversal { circle: c.clone() });
            }
        }

        ValidationReport { violations: v }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.violations.first() {
            None => Ok(()),
            Some(first) => Err(Error::Invalid(first.to_string())),
        }
    }

    pub fn locus_profile(&self, id: &LocusId) -> Result<LocusProfile> {
        let l = self.locus(id).ok_or_else(|| Error::UnknownLocus(id.clone()))?;
        Ok(LocusProfile {
            degree: l.degree(),
            wrapping: l.wrapping,
            component_count: l.component_count(),
            is_normal: l.is_normal(),
            is_pure: l.is_pure(),
            is_tribranched: l.degree() == 3,
            is_spreadable: l.is_spreadable(),
        })
    }

    /// Loci touched by the boundary of a region, in boundary order.
    /// Errors if some boundary circle is unattached.
    pub(crate) fn boundary_loci(&self, region: usize, inc: &Incidence) -> Result<Vec<(usize, usize)>> {
        let r = &self.regions[region];
        r.boundaries
            .iter()
            .map(|c| {
                inc.slot_of
                    .get(c)
                    .copied()
                    .ok_or_else(|| Error::UnattachedBoundary(r.id.clone()))
            })
            .collect()
    }

    pub fn classify_region(&self, id: &RegionId) -> Result<RegionClass> {
        let ri = self.region_index(id)?;
        let inc = self.incidence();
        self.classify_index(ri, &inc)
    }

    pub(crate) fn classify_index(&self, ri: usize, inc: &Incidence) -> Result<RegionClass> {
        let r = &self.regions[ri];
        let topo = r.topology();
        if topo.boundary_count == 0 {
            return Ok(RegionClass::Other);
        }
        let ends = self.boundary_loci(ri, inc)?;
        if topo.is_annulus() {
            let (la, lb) = (ends[0].0, ends[1].0);
            if la == lb {
                return Ok(RegionClass::ClosingAnnulus);
            }
            let na = self.loci[la].is_normal();
            let nb = self.loci[lb].is_normal();
            return Ok(match (na, nb) {
                (true, true) => RegionClass::NormalAnnulus,
                (false, false) => RegionClass::UnnormalAnnulus,
                _ => RegionClass::QuasiNormalAnnulus,
            });
        }
        if topo.is_moebius() {
            return Ok(if self.loci[ends[0].0].is_normal() {
                RegionClass::NormalMoebius
            } else {
                RegionClass::UnnormalMoebius
            });
        }
        Ok(RegionClass::Other)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.regions.iter().map(|r| r.topology().euler()).sum()
    }

    /// Connected components of the region/locus incidence graph.
    /// Returns one label per region followed by one per locus.
    pub(crate) fn component_labels(&self) -> (Vec<usize>, usize) {
        let nr = self.regions.len();
        let mut uf = UnionFind::new(nr + self.loci.len());
        let inc = self.incidence();
        for (li, l) in self.loci.iter().enumerate() {
            for c in &l.slots {
                if let Some(&ri) = inc.region_of.get(c) {
                    uf.union(ri, nr + li);
                }
            }
        }
        let mut label = HashMap::new();
        let labels: Vec<usize> = (0..nr + self.loci.len())
            .map(|i| {
                let root = uf.find(i);
                let next = label.len();
                *label.entry(root).or_insert(next)
            })
            .collect();
        let count = label.len();
        (labels, count)
    }

    pub fn connected_components(&self) -> usize {
        self.component_labels().1
    }

    /// Disjoint union; ids of `other` are prefixed to stay unique.
    pub fn disjoint_union(&self, other: &MultibranchedSurface, prefix: &str) -> MultibranchedSurface {
        let mut out = self.clone();
        for r in &other.regions {
            out.regions.push(Region {
                id: RegionId(format!("{prefix}{}", r.id)),
                orientable: r.orientable,
                genus: r.genus,
                boundaries: r.boundaries.iter().map(|c| CircleId(format!("{prefix}{c}"))).collect(),
            });
        }
        for l in &other.loci {
            out.loci.push(BranchLocus {
                id: LocusId(format!("{prefix}{}", l.id)),
                wrapping: l.wrapping,
                slots: l.slots.iter().map(|c| CircleId(format!("{prefix}{c}"))).collect(),
            });
        }
        out.reversed
            .extend(other.reversed.iter().map(|c| CircleId(format!("{prefix}{c}"))));
        out
    }

    /// Simultaneous reversal of every slot cycle (keeping basepoints).
    pub fn mirrored(&self) -> MultibranchedSurface {
        let mut out = self.clone();
        for l in &mut out.loci {
            if !l.slots.is_empty() {
                l.slots[1..].reverse();
            }
        }
        out
    }
}

/// Fresh identifiers `prefix1`, `prefix2`, ... that avoid a set of used names.
pub(crate) struct FreshIds {
    used: HashSet<String>,
}

impl FreshIds {
    pub fn for_surface(x: &MultibranchedSurface) -> Self {
        let mut used = HashSet::new();
        for r in &x.regions {
            used.insert(r.id.0.clone());
            used.extend(r.boundaries.iter().map(|c| c.0.clone()));
        }
        for l in &x.loci {
            used.insert(l.id.0.clone());
            used.extend(l.slots.iter().map(|c| c.0.clone()));
        }
        FreshIds { used }
    }

    pub fn next(&mut self, prefix: &str) -> String {
        let mut n = 1usize;
        loop {
            let candidate = format!("{prefix}{n}");
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
            n += 1;
        }
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
