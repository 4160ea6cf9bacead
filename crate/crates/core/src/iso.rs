//! Canonical forms and isomorphism certificates.
//!
//! Two surfaces are isomorphic when there are bijections of loci, regions
//! and boundary circles preserving wrapping numbers, region topology and
//! attachment, where each slot cycle may be rotated (and reversed, depending
//! on the [`SymmetryMode`]). Boundary circles of one region are
//! interchangeable.
//!
//! The canonical form is the least token sequence over all admissible
//! labelings. Regions and loci are first colored by iterated refinement of
//! local invariants; the labeling is then built one locus at a time, always
//! extending by the least possible segment and branching only on ties.
//! Components are encoded independently and sorted.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{CircleId, LocusId, MultibranchedSurface, RegionId};

/// Version prefix of canonical form bytes.
pub const CANONICAL_PREFIX: &[u8] = b"mbscf1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryMode {
    /// Rotations of every slot cycle, relabeling, boundary permutations.
    #[default]
    Rotational,
    /// Rotational plus one simultaneous reversal of all slot cycles.
    Mirror,
    /// Independent reversal of each slot cycle. Diagnostic only: it does not
    /// commute with the IX splice.
    DihedralPerLocus,
}

impl SymmetryMode {
    fn tag(self) -> u8 {
        match self {
            SymmetryMode::Rotational => b'R',
            SymmetryMode::Mirror => b'M',
            SymmetryMode::DihedralPerLocus => b'D',
        }
    }
}

impl fmt::Display for SymmetryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryMode::Rotational => "rotational",
            SymmetryMode::Mirror => "mirror",
            SymmetryMode::DihedralPerLocus => "dihedral_per_locus",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub mode: SymmetryMode,
    pub bytes: Vec<u8>,
}

impl PartialOrd for SymmetryMode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SymmetryMode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tag().cmp(&other.tag())
    }
}

impl CanonicalForm {
    pub fn hash64(&self) -> u64 {
        let digest = Sha256::digest(&self.bytes);
        u64::from_be_bytes(digest[..8].try_into().unwrap())
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

const NO_REGION: usize = usize::MAX;
const TAG_REGION_ONLY: u32 = 0;
const TAG_WITH_LOCI: u32 = 1;

/// Index-based view of a surface.
struct Indexed {
    /// (orientable, genus, boundary_count, unattached)
    region_topo: Vec<(u32, u32, u32, u32)>,
    wrapping: Vec<u32>,
    /// Region index of each slot.
    slots: Vec<Vec<usize>>,
    /// Slot circle runs against the locus (orientable regions only).
    neg: Vec<Vec<bool>>,
    region_loci: Vec<Vec<usize>>,
    region_label: Vec<usize>,
    locus_label: Vec<usize>,
    components: usize,
}

impl Indexed {
    fn new(x: &MultibranchedSurface) -> Self {
        let inc = x.incidence();
        let nr = x.regions.len();
        let slots: Vec<Vec<usize>> = x
            .loci
            .iter()
            .map(|l| {
                l.slots
                    .iter()
                    .map(|c| inc.region_of.get(c).copied().unwrap_or(NO_REGION))
                    .collect()
            })
            .collect();
        let neg = x
            .loci
            .iter()
            .zip(&slots)
            .map(|(l, s)| {
                l.slots
                    .iter()
                    .zip(s)
                    .map(|(c, &r)| r != NO_REGION && x.regions[r].orientable && x.reversed.contains(c))
                    .collect()
            })
            .collect();
        let mut attached = vec![0u32; nr];
        let mut region_loci = vec![Vec::new(); nr];
        for (li, s) in slots.iter().enumerate() {
            for &r in s {
                if r != NO_REGION {
                    attached[r] += 1;
                    region_loci[r].push(li);
                }
            }
        }
        let region_topo = x
            .regions
            .iter()
            .zip(&attached)
            .map(|(r, &a)| {
                let b = r.boundaries.len() as u32;
                (r.orientable as u32, r.genus, b, b.saturating_sub(a))
            })
            .collect();
        let (labels, components) = x.component_labels();
        Indexed {
            region_topo,
            wrapping: x.loci.iter().map(|l| l.wrapping).collect(),
            slots,
            neg,
            region_loci,
            region_label: labels[..nr].to_vec(),
            locus_label: labels[nr..].to_vec(),
            components,
        }
    }
}

fn ranks<T: Ord + Clone>(sigs: &[T]) -> (Vec<u32>, usize) {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    let ranks = sigs.iter().map(|s| sorted.binary_search(s).unwrap() as u32).collect();
    (ranks, sorted.len())
}

/// Least rotation (and, when `dihedral`, reflection) of a cyclic word.
fn min_cyclic_word(word: &[u32], dihedral: bool) -> Vec<u32> {
    let k = word.len();
    let mut best: Option<Vec<u32>> = None;
    let mut consider = |cand: Vec<u32>| {
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    };
    for s in 0..k {
        consider((0..k).map(|j| word[(s + j) % k]).collect());
        if dihedral {
            consider((0..k).map(|j| word[(s + k - j) % k]).collect());
        }
    }
    best.unwrap_or_default()
}

/// Iterated color refinement; returns (region colors, locus colors).
fn refine(ix: &Indexed, dihedral: bool) -> (Vec<u32>, Vec<u32>) {
    let (mut rc, mut nrc) = ranks(&ix.region_topo);
    let shapes: Vec<(u32, usize)> = ix.wrapping.iter().zip(&ix.slots).map(|(&w, s)| (w, s.len())).collect();
    let (mut lc, mut nlc) = ranks(&shapes);
    let color_of = |rc: &[u32], r: usize| if r == NO_REGION { u32::MAX } else { rc[r] };
    loop {
        let rsig: Vec<(u32, Vec<u32>)> = (0..rc.len())
            .map(|r| {
                let mut around: Vec<u32> = ix.region_loci[r].iter().map(|&l| lc[l]).collect();
                around.sort_unstable();
                (rc[r], around)
            })
            .collect();
        let lsig: Vec<(u32, Vec<u32>)> = (0..lc.len())
            .map(|l| {
                let word: Vec<u32> = ix.slots[l].iter().map(|&r| color_of(&rc, r)).collect();
                (lc[l], min_cyclic_word(&word, dihedral))
            })
            .collect();
        let (rc2, nrc2) = ranks(&rsig);
        let (lc2, nlc2) = ranks(&lsig);
        let stable = nrc2 == nrc && nlc2 == nlc;
        rc = rc2;
        lc = lc2;
        nrc = nrc2;
        nlc = nlc2;
        if stable {
            return (rc, lc);
        }
    }
}

/// Position of the `j`-th slot read from `start` in direction `reversed`.
fn slot_at(k: usize, start: usize, reversed: bool, j: usize) -> usize {
    if reversed {
        (start + k - j % k) % k
    } else {
        (start + j) % k
    }
}

/// How one locus is read: from slot `start`, backwards when `reversed`, with
/// its direction flipped when `flipped`.
#[derive(Clone, Copy, Debug)]
struct Placement {
    locus: usize,
    start: usize,
    reversed: bool,
    flipped: bool,
}

/// Position in the component's locus list, placement, freshly numbered regions.
type Tie = (usize, Placement, Vec<(usize, bool)>);

#[derive(Clone, Debug, Default)]
struct Labeling {
    loci: Vec<Placement>,
    /// Regions in numbering order, with their orientation flips.
    regions: Vec<(usize, bool)>,
}

struct ComponentSearch<'a> {
    ix: &'a Indexed,
    rc: &'a [u32],
    lc: &'a [u32],
    loci: Vec<usize>,
    per_locus_reversal: bool,
    best: Option<(Vec<u32>, Labeling)>,
}

struct Partial {
    /// region -> (number, orientation flip)
    numbering: HashMap<usize, (u32, bool)>,
    order: Vec<(usize, bool)>,
    used: Vec<bool>,
    tokens: Vec<u32>,
    choices: Vec<Placement>,
}

impl ComponentSearch<'_> {
    /// Tokens of one placement and the regions it numbers first. A region
    /// seen for the first time is oriented so its first circle reads
    /// positively.
    fn segment(&self, p: Placement, numbering: &HashMap<usize, (u32, bool)>) -> (Vec<u32>, Vec<(usize, bool)>) {
        let slots = &self.ix.slots[p.locus];
        let k = slots.len();
        let mut seg = Vec::with_capacity(3 + 3 * k);
        seg.extend([self.lc[p.locus], self.ix.wrapping[p.locus], k as u32]);
        let mut fresh: Vec<(usize, bool)> = Vec::new();
        let base = numbering.len() as u32;
        for j in 0..k {
            let at = slot_at(k, p.start, p.reversed, j);
            let r = slots[at];
            if r == NO_REGION {
                seg.extend([u32::MAX, u32::MAX, 0]);
                continue;
            }
            let neg = self.ix.neg[p.locus][at] ^ p.flipped;
            let (num, flip) = match numbering.get(&r) {
                Some(&known) => known,
                None => match fresh.iter().position(|&(f, _)| f == r) {
                    Some(i) => (base + i as u32, fresh[i].1),
                    None => {
                        fresh.push((r, neg));
                        (base + fresh.len() as u32 - 1, neg)
                    }
                },
            };
            let sign = self.ix.region_topo[r].0 == 1 && (neg ^ flip);
            seg.extend([self.rc[r], num, sign as u32]);
        }
        (seg, fresh)
    }

    fn run(&mut self, state: &mut Partial) {
        if let Some((best, _)) = &self.best {
            let n = state.tokens.len();
            if state.tokens[..] > best[..n] {
                return;
            }
        }
        if state.used.iter().all(|&u| u) {
            let mut tokens = state.tokens.clone();
            for &(r, _) in &state.order {
                let (o, g, b, u) = self.ix.region_topo[r];
                tokens.extend([self.rc[r], o, g, b, u]);
            }
            if self.best.as_ref().is_none_or(|(b, _)| tokens < *b) {
                self.best = Some((
                    tokens,
                    Labeling {
                        loci: state.choices.clone(),
                        regions: state.order.clone(),
                    },
                ));
            }
            return;
        }

        let mut least: Option<Vec<u32>> = None;
        let mut ties: Vec<Tie> = Vec::new();
        let directions: &[bool] = if self.per_locus_reversal {
            &[false, true]
        } else {
            &[false]
        };
        for (pos, &locus) in self.loci.iter().enumerate() {
            if state.used[pos] {
                continue;
            }
            let k = self.ix.slots[locus].len();
            let signed = self.ix.slots[locus]
                .iter()
                .any(|&r| r != NO_REGION && self.ix.region_topo[r].0 == 1);
            let flips: &[bool] = if signed { &[false, true] } else { &[false] };
            for start in 0..k {
                for &reversed in directions {
                    for &flipped in flips {
                        let p = Placement {
                            locus,
                            start,
                            reversed,
                            flipped,
                        };
                        let (seg, fresh) = self.segment(p, &state.numbering);
                        match least.as_ref().map(|b| seg.cmp(b)) {
                            Some(Ordering::Greater) => {}
                            Some(Ordering::Equal) => ties.push((pos, p, fresh)),
                            _ => {
                                least = Some(seg);
                                ties.clear();
                                ties.push((pos, p, fresh));
                            }
                        }
                    }
                }
            }
        }
        let seg = least.expect("an unused locus remains");
        for (pos, p, fresh) in ties {
            let mark_tokens = state.tokens.len();
            let mark_order = state.order.len();
            for (r, flip) in fresh {
                state.numbering.insert(r, (state.order.len() as u32, flip));
                state.order.push((r, flip));
            }
            state.tokens.extend_from_slice(&seg);
            state.used[pos] = true;
            state.choices.push(p);

            self.run(state);

            state.choices.pop();
            state.used[pos] = false;
            state.tokens.truncate(mark_tokens);
            for (r, _) in state.order.drain(mark_order..) {
                state.numbering.remove(&r);
            }
        }
    }
}

/// Canonical tokens and labeling for one fixed orientation convention.
fn labeling_tokens(x: &MultibranchedSurface, per_locus_reversal: bool, dihedral_refine: bool) -> (Vec<u32>, Labeling) {
    let ix = Indexed::new(x);
    let (rc, lc) = refine(&ix, dihedral_refine);

    let mut comps: Vec<(Vec<u32>, Labeling)> = Vec::with_capacity(ix.components);
    let mut comp_loci: Vec<Vec<usize>> = vec![Vec::new(); ix.components];
    let mut comp_regions: Vec<Vec<usize>> = vec![Vec::new(); ix.components];
    for (l, &c) in ix.locus_label.iter().enumerate() {
        comp_loci[c].push(l);
    }
    for (r, &c) in ix.region_label.iter().enumerate() {
        comp_regions[c].push(r);
    }
    for c in 0..ix.components {
        if comp_loci[c].is_empty() {
            let r = comp_regions[c][0];
            let (o, g, b, u) = ix.region_topo[r];
            comps.push((
                vec![TAG_REGION_ONLY, rc[r], o, g, b, u],
                Labeling {
                    loci: Vec::new(),
                    regions: vec![(r, false)],
                },
            ));
            continue;
        }
        let n = comp_loci[c].len();
        let mut search = ComponentSearch {
            ix: &ix,
            rc: &rc,
            lc: &lc,
            loci: comp_loci[c].clone(),
            per_locus_reversal,
            best: None,
        };
        let mut state = Partial {
            numbering: HashMap::new(),
            order: Vec::new(),
            used: vec![false; n],
            tokens: Vec::new(),
            choices: Vec::new(),
        };
        search.run(&mut state);
        let (mut tokens, labeling) = search.best.expect("component search yields a labeling");
        tokens.insert(0, TAG_WITH_LOCI);
        comps.push((tokens, labeling));
    }
    comps.sort_by(|a, b| a.0.cmp(&b.0));

    let mut tokens = vec![comps.len() as u32];
    let mut labeling = Labeling::default();
    for (t, l) in comps {
        tokens.push(t.len() as u32);
        tokens.extend(t);
        labeling.loci.extend(l.loci);
        labeling.regions.extend(l.regions);
    }
    (tokens, labeling)
}

fn canonical_labeling(x: &MultibranchedSurface, mode: SymmetryMode) -> (Vec<u32>, Labeling) {
    match mode {
        SymmetryMode::Rotational => labeling_tokens(x, false, false),
        SymmetryMode::DihedralPerLocus => labeling_tokens(x, true, true),
        SymmetryMode::Mirror => {
            let plain = labeling_tokens(x, false, true);
            let (tokens, mut labeling) = labeling_tokens(&x.mirrored(), false, true);
            if plain.0 <= tokens {
                return plain;
            }
            // slot j of the mirrored cycle is slot -j of the original
            for p in &mut labeling.loci {
                let k = x.loci[p.locus].slots.len();
                p.start = (k - p.start) % k;
                p.reversed = true;
            }
            (tokens, labeling)
        }
    }
}

fn to_bytes(tokens: &[u32], mode: SymmetryMode) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(CANONICAL_PREFIX.len() + 1 + 4 * tokens.len());
    bytes.extend_from_slice(CANONICAL_PREFIX);
    bytes.push(mode.tag());
    for t in tokens {
        bytes.extend_from_slice(&t.to_be_bytes());
    }
    bytes
}

pub fn canonical_form(x: &MultibranchedSurface, mode: SymmetryMode) -> CanonicalForm {
    let (tokens, _) = canonical_labeling(x, mode);
    CanonicalForm {
        mode,
        bytes: to_bytes(&tokens, mode),
    }
}

/// First eight bytes of the SHA-256 of the canonical form.
pub fn canonical_hash(x: &MultibranchedSurface, mode: SymmetryMode) -> u64 {
    canonical_form(x, mode).hash64()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusMatch {
    pub from: LocusId,
    pub to: LocusId,
    /// Slot `i` of `from` lands on slot `offset + i` of `to`, or on
    /// `offset - i` when `reversed`.
    pub offset: usize,
    pub reversed: bool,
    /// The locus direction is flipped.
    #[serde(default)]
    pub flipped: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMatch {
    pub from: RegionId,
    pub to: RegionId,
    /// The region orientation is flipped.
    #[serde(default)]
    pub flipped: bool,
}

/// An explicit isomorphism `X -> Y`.
///
/// A circle of an orientable region keeps its sign up to the flips of its
/// locus and its region.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoCertificate {
    pub loci: Vec<LocusMatch>,
    pub regions: Vec<RegionMatch>,
    pub circles: Vec<(CircleId, CircleId)>,
}

impl IsoCertificate {
    /// Checks that the certificate maps `x` onto `y` exactly. Reversal flags
    /// are only accepted when `mode` permits them.
    pub fn verify(&self, x: &MultibranchedSurface, y: &MultibranchedSurface, mode: SymmetryMode) -> bool {
        let bijective = |pairs: Vec<(&str, &str)>, left: Vec<&str>, right: Vec<&str>| {
            let mut a: Vec<&str> = pairs.iter().map(|p| p.0).collect();
            let mut b: Vec<&str> = pairs.iter().map(|p| p.1).collect();
            let (mut l, mut r) = (left, right);
            a.sort_unstable();
            b.sort_unstable();
            l.sort_unstable();
            r.sort_unstable();
            a == l && b == r
        };
        if !bijective(
            self.loci.iter().map(|m| (m.from.as_str(), m.to.as_str())).collect(),
            x.loci.iter().map(|l| l.id.as_str()).collect(),
            y.loci.iter().map(|l| l.id.as_str()).collect(),
        ) || !bijective(
            self.regions.iter().map(|m| (m.from.as_str(), m.to.as_str())).collect(),
            x.regions.iter().map(|r| r.id.as_str()).collect(),
            y.regions.iter().map(|r| r.id.as_str()).collect(),
        ) || !bijective(
            self.circles.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect(),
            x.regions
                .iter()
                .flat_map(|r| r.boundaries.iter().map(|c| c.as_str()))
                .collect(),
            y.regions
                .iter()
                .flat_map(|r| r.boundaries.iter().map(|c| c.as_str()))
                .collect(),
        ) {
            return false;
        }
        match mode {
            SymmetryMode::Rotational if self.loci.iter().any(|m| m.reversed) => return false,
            SymmetryMode::Mirror if self.loci.iter().any(|m| m.reversed != self.loci[0].reversed) => return false,
            _ => {}
        }
        let circle: BTreeMap<&CircleId, &CircleId> = self.circles.iter().map(|(a, b)| (a, b)).collect();
        let region_flip: BTreeMap<&RegionId, bool> = self.regions.iter().map(|m| (&m.from, m.flipped)).collect();
        let inc_x = x.incidence();
        for m in &self.loci {
            let (Some(lx), Some(ly)) = (x.locus(&m.from), y.locus(&m.to)) else {
                return false;
            };
            let k = lx.slots.len();
            if lx.wrapping != ly.wrapping || k != ly.slots.len() {
                return false;
            }
            for (i, c) in lx.slots.iter().enumerate() {
                let j = if m.reversed {
                    (m.offset + k - i % k) % k
                } else {
                    (m.offset + i) % k
                };
                if circle.get(c) != Some(&&ly.slots[j]) {
                    return false;
                }
                let Some(&r) = inc_x.region_of.get(c) else {
                    continue;
                };
                let rx = &x.regions[r];
                if rx.orientable {
                    let expected = x.reversed.contains(c) ^ m.flipped ^ region_flip[&rx.id];
                    if y.reversed.contains(&ly.slots[j]) != expected {
                        return false;
                    }
                }
            }
        }
        for m in &self.regions {
            let (Some(rx), Some(ry)) = (x.region(&m.from), y.region(&m.to)) else {
                return false;
            };
            if rx.topology() != ry.topology() {
                return false;
            }
            let mut mapped: Vec<&CircleId> = rx.boundaries.iter().filter_map(|c| circle.get(c).copied()).collect();
            let mut target: Vec<&CircleId> = ry.boundaries.iter().collect();
            mapped.sort();
            target.sort();
            if mapped != target {
                return false;
            }
        }
        true
    }

    pub fn inverse(&self, x: &MultibranchedSurface) -> IsoCertificate {
        IsoCertificate {
            loci: self
                .loci
                .iter()
                .map(|m| {
                    let k = x.locus(&m.from).map_or(1, |l| l.slots.len().max(1));
                    // i = sign * (j - offset)
                    let offset = if m.reversed {
                        m.offset % k
                    } else {
                        (k - m.offset % k) % k
                    };
                    LocusMatch {
                        from: m.to.clone(),
                        to: m.from.clone(),
                        offset,
                        reversed: m.reversed,
                        flipped: m.flipped,
                    }
                })
                .collect(),
            regions: self
                .regions
                .iter()
                .map(|m| RegionMatch {
                    from: m.to.clone(),
                    to: m.from.clone(),
                    flipped: m.flipped,
                })
                .collect(),
            circles: self.circles.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// `then ∘ self`, where `self: X -> Y` and `then: Y -> Z`.
    pub fn compose(&self, then: &IsoCertificate, x: &MultibranchedSurface) -> IsoCertificate {
        let second: HashMap<&LocusId, &LocusMatch> = then.loci.iter().map(|m| (&m.from, m)).collect();
        let region: HashMap<&RegionId, &RegionMatch> = then.regions.iter().map(|m| (&m.from, m)).collect();
        let circle: HashMap<&CircleId, &CircleId> = then.circles.iter().map(|(a, b)| (a, b)).collect();
        IsoCertificate {
            loci: self
                .loci
                .iter()
                .filter_map(|m1| {
                    let m2 = second.get(&m1.to)?;
                    let k = x.locus(&m1.from).map_or(1, |l| l.slots.len().max(1));
                    // z = o2 + s2 * (o1 + s1 * i)
                    let o1 = m1.offset % k;
                    let shifted = if m2.reversed { (k - o1) % k } else { o1 };
                    Some(LocusMatch {
                        from: m1.from.clone(),
                        to: m2.to.clone(),
                        offset: (m2.offset + shifted) % k,
                        reversed: m1.reversed != m2.reversed,
                        flipped: m1.flipped != m2.flipped,
                    })
                })
                .collect(),
            regions: self
                .regions
                .iter()
                .filter_map(|m1| {
                    region.get(&m1.to).map(|m2| RegionMatch {
                        from: m1.from.clone(),
                        to: m2.to.clone(),
                        flipped: m1.flipped != m2.flipped,
                    })
                })
                .collect(),
            circles: self
                .circles
                .iter()
                .filter_map(|(a, b)| circle.get(b).map(|c| (a.clone(), (*c).clone())))
                .collect(),
        }
    }
}

/// An explicit isomorphism, or `None` when the canonical forms differ.
pub fn are_isomorphic(
    x: &MultibranchedSurface,
    y: &MultibranchedSurface,
    mode: SymmetryMode,
) -> Option<IsoCertificate> {
    let (tx, lx) = canonical_labeling(x, mode);
    let (ty, ly) = canonical_labeling(y, mode);
    if tx != ty {
        return None;
    }
    let inc_x = x.incidence();
    let inc_y = y.incidence();

    let mut loci = Vec::with_capacity(lx.loci.len());
    let mut circles = Vec::new();
    for (pa, pb) in lx.loci.iter().zip(&ly.loci) {
        let (locus_x, locus_y) = (&x.loci[pa.locus], &y.loci[pb.locus]);
        let k = locus_x.slots.len();
        for j in 0..k {
            circles.push((
                locus_x.slots[slot_at(k, pa.start, pa.reversed, j)].clone(),
                locus_y.slots[slot_at(k, pb.start, pb.reversed, j)].clone(),
            ));
        }
        let reversed = pa.reversed != pb.reversed;
        let (sa, sb) = (pa.start, pb.start);
        // py = offset + sign * px at j = 0
        let offset = if reversed { (sb + sa) % k } else { (sb + k - sa) % k };
        loci.push(LocusMatch {
            from: locus_x.id.clone(),
            to: locus_y.id.clone(),
            offset,
            reversed,
            flipped: pa.flipped != pb.flipped,
        });
    }
    let mut regions = Vec::with_capacity(lx.regions.len());
    for (&(a, fa), &(b, fb)) in lx.regions.iter().zip(&ly.regions) {
        let (rx, ry) = (&x.regions[a], &y.regions[b]);
        regions.push(RegionMatch {
            from: rx.id.clone(),
            to: ry.id.clone(),
            flipped: fa != fb,
        });
        let free_x = rx.boundaries.iter().filter(|c| !inc_x.slot_of.contains_key(*c));
        let free_y = ry.boundaries.iter().filter(|c| !inc_y.slot_of.contains_key(*c));
        circles.extend(free_x.cloned().zip(free_y.cloned()));
    }
    let cert = IsoCertificate { loci, regions, circles };
    debug_assert!(cert.verify(x, y, mode), "certificate failed to verify");
    Some(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{BranchLocus, Region, ValidityMode};

    /// A relabeled, rotated copy of theta(3).
    fn theta3_scrambled() -> MultibranchedSurface {
        MultibranchedSurface::new(
            ValidityMode::Strict,
            vec![
                Region::annulus("Z3", "q3", "p3"),
                Region::annulus("Z1", "p1", "q1"),
                Region::annulus("Z2", "q2", "p2"),
            ],
            vec![
                BranchLocus::new("Y", 1, ["q2", "q3", "q1"]),
                BranchLocus::new("X", 1, ["p3", "p1", "p2"]),
            ],
        )
    }

    /// Four distinct once-punctured regions around one normal locus: chiral.
    pub(crate) fn chiral(order: [&str; 4]) -> MultibranchedSurface {
        let regions = vec![
            Region::new("P1", true, 1, ["c1"]),
            Region::new("P2", true, 2, ["c2"]),
            Region::new("P3", false, 1, ["c3"]),
            Region::new("P4", false, 2, ["c4"]),
        ];
        MultibranchedSurface::new(ValidityMode::Strict, regions, vec![BranchLocus::new("B", 1, order)])
    }

    #[test]
    fn relabeling_does_not_change_form() {
        for mode in [
            SymmetryMode::Rotational,
            SymmetryMode::Mirror,
            SymmetryMode::DihedralPerLocus,
        ] {
            assert_eq!(
                canonical_form(&fixtures::theta(3), mode),
                canonical_form(&theta3_scrambled(), mode)
            );
        }
        assert!(canonical_form(&fixtures::theta(3), SymmetryMode::Rotational)
            .bytes
            .starts_with(b"mbscf1"));
    }

    #[test]
    fn distinct_fixtures_differ() {
        let forms: Vec<_> = [fixtures::theta(3), fixtures::mb(), fixtures::qn(), fixtures::theta(4)]
            .iter()
            .map(|x| canonical_form(x, SymmetryMode::Rotational))
            .collect();
        for i in 0..forms.len() {
            for j in i + 1..forms.len() {
                assert_ne!(forms[i], forms[j]);
            }
        }
    }

    #[test]
    fn certificate_verifies() {
        let x = fixtures::theta(3);
        let y = theta3_scrambled();
        let c = are_isomorphic(&x, &y, SymmetryMode::Rotational).unwrap();
        assert!(c.verify(&x, &y, SymmetryMode::Rotational));
        let inv = c.inverse(&x);
        assert!(inv.verify(&y, &x, SymmetryMode::Rotational));
        let id = c.compose(&inv, &x);
        assert!(id.verify(&x, &x, SymmetryMode::Rotational));
    }

    #[test]
    fn self_isomorphism() {
        for x in [
            fixtures::theta(3),
            fixtures::mb(),
            fixtures::qn(),
            fixtures::closed_surface(false, 2),
        ] {
            for mode in [
                SymmetryMode::Rotational,
                SymmetryMode::Mirror,
                SymmetryMode::DihedralPerLocus,
            ] {
                let c = are_isomorphic(&x, &x, mode).unwrap();
                assert!(c.verify(&x, &x, mode));
            }
        }
    }

    #[test]
    fn qn_and_mb_are_not_isomorphic() {
        for mode in [
            SymmetryMode::Rotational,
            SymmetryMode::Mirror,
            SymmetryMode::DihedralPerLocus,
        ] {
            assert!(are_isomorphic(&fixtures::qn(), &fixtures::mb(), mode).is_none());
        }
    }

    #[test]
    fn chirality_is_seen_by_rotational_only() {
        let x = chiral(["c1", "c2", "c3", "c4"]);
        let y = chiral(["c4", "c3", "c2", "c1"]);
        assert!(x.validate().is_valid());
        assert!(are_isomorphic(&x, &y, SymmetryMode::Rotational).is_none());
        let c = are_isomorphic(&x, &y, SymmetryMode::Mirror).unwrap();
        assert!(c.verify(&x, &y, SymmetryMode::Mirror));
        assert!(c.loci.iter().all(|m| m.reversed));
        assert!(!c.verify(&x, &y, SymmetryMode::Rotational));
        let d = are_isomorphic(&x, &y, SymmetryMode::DihedralPerLocus).unwrap();
        assert!(d.verify(&x, &y, SymmetryMode::DihedralPerLocus));
    }

    #[test]
    fn per_locus_reversal_is_coarser_than_mirror() {
        // theta(3) with one cycle reversed: mirror cannot fix one locus alone
        let x = fixtures::theta(3);
        let mut y = x.clone();
        y.loci[1].slots.reverse();
        assert!(are_isomorphic(&x, &y, SymmetryMode::Rotational).is_none());
        assert!(are_isomorphic(&x, &y, SymmetryMode::Mirror).is_none());
        let c = are_isomorphic(&x, &y, SymmetryMode::DihedralPerLocus).unwrap();
        assert!(c.verify(&x, &y, SymmetryMode::DihedralPerLocus));
    }

    #[test]
    fn components_are_order_independent() {
        let a = fixtures::theta(3).disjoint_union(&fixtures::mb(), "m");
        let b = fixtures::mb().disjoint_union(&fixtures::theta(3), "t");
        assert_eq!(
            canonical_form(&a, SymmetryMode::Rotational),
            canonical_form(&b, SymmetryMode::Rotational)
        );
        let c = are_isomorphic(&a, &b, SymmetryMode::Rotational).unwrap();
        assert!(c.verify(&a, &b, SymmetryMode::Rotational));
    }

    #[test]
    fn hash_is_stable() {
        // recorded once; changes here invalidate stored hashes
        let h = canonical_hash(&fixtures::theta(3), SymmetryMode::Rotational);
        assert_eq!(h, canonical_hash(&theta3_scrambled(), SymmetryMode::Rotational));
        assert_eq!(format!("{h:016x}").len(), 16);
    }

    #[test]
    fn sign_gauge_does_not_change_form() {
        let x = fixtures::theta(3);
        let locus_flip = x.clone().with_reversed(["a1", "a2", "a3"]);
        let region_flip = x.clone().with_reversed(["a2", "b2"]);
        let both = x.clone().with_reversed(["a1", "a3", "b2"]);
        for y in [&locus_flip, &region_flip, &both] {
            for mode in [
                SymmetryMode::Rotational,
                SymmetryMode::Mirror,
                SymmetryMode::DihedralPerLocus,
            ] {
                assert_eq!(canonical_form(&x, mode), canonical_form(y, mode));
                let cert = are_isomorphic(&x, y, mode).unwrap();
                assert!(cert.verify(&x, y, mode));
                assert!(cert.inverse(&x).verify(y, &x, mode));
            }
        }
        let twisted = x.clone().with_reversed(["a1"]);
        assert!(are_isomorphic(&x, &twisted, SymmetryMode::DihedralPerLocus).is_none());
    }

    #[test]
    fn torus_and_klein_bottle_differ() {
        let klein = MultibranchedSurface::new(
            ValidityMode::Minor,
            vec![Region::annulus("T", "p", "q")],
            vec![BranchLocus::new("L", 1, ["p", "q"])],
        );
        let torus = klein.clone().with_reversed(["q"]);
        assert!(are_isomorphic(&torus, &klein, SymmetryMode::DihedralPerLocus).is_none());
        assert!(are_isomorphic(&torus, &klein.clone().with_reversed(["p"]), SymmetryMode::Rotational).is_some());
    }

    #[test]
    fn signs_on_nonorientable_regions_are_ignored() {
        let cert = are_isomorphic(
            &fixtures::mb(),
            &fixtures::mb().with_reversed(["c1", "c2"]),
            SymmetryMode::Rotational,
        );
        assert!(cert.is_some_and(|c| c.regions.iter().any(|m| m.flipped)));
    }
}
