//! IX-, XI- and IH-moves and maximal spreading.
//!
//! An IX-move contracts an eligible region onto its core circle and splices
//! the slot cycles of the loci at its ends:
//!
//! - normal annulus between `L1` and `L2`: the merged cycle is `L1` cut open
//!   at the annulus slot followed by `L2` cut open at the annulus slot;
//! - quasi-normal annulus: the slot of the unnormal locus is replaced in place
//!   by the cut-open normal locus, keeping the unnormal wrapping number;
//! - normal Möbius band: the cut-open cycle is closed up again with wrapping 2.
//!
//! XI-moves are exactly the reversals of these three splices.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iso::{are_isomorphic, canonical_form, canonical_hash, SymmetryMode};
use crate::model::{
    BranchLocus, CircleId, FreshIds, Incidence, LocusId, MultibranchedSurface, Region, RegionClass, RegionId,
    ValidityMode,
};

/// A region along which an IX-move can be performed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IxSite {
    pub region: RegionId,
    pub kind: RegionClass,
}

/// How a spreadable locus is split. Gap `g` sits just before slot `g`, so
/// cutting at gap `g` reads the cycle starting from slot `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum XiSplit {
    /// Normal locus: slots `gap_a..gap_b` form one new locus, the rest the
    /// other; both gain one end of a new normal annulus.
    NormalSplit { gap_a: usize, gap_b: usize },
    /// Unnormal locus: the `len` consecutive slots starting at `start` move to
    /// a new normal locus joined by a quasi-normal annulus to the remainder.
    /// When `len` equals the slot count, `start` is the cut gap.
    QuasiSplit { start: usize, len: usize },
    /// Wrapping-2 locus: becomes normal, carrying a new Möbius band; the cycle
    /// is read from `cut_gap`.
    MoebiusSplit { cut_gap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct XiChoice {
    pub locus: LocusId,
    pub split: XiSplit,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "lowercase")]
pub enum Move {
    Ix(IxSite),
    Xi(XiChoice),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStep {
    #[serde(flatten)]
    pub mv: Move,
    /// Rotational canonical hash before the move, as 16 hex digits.
    #[serde(with = "hex_hash")]
    pub before: u64,
    #[serde(with = "hex_hash")]
    pub after: u64,
}

mod hex_hash {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(h: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{h:016x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        u64::from_str_radix(&text, 16).map_err(D::Error::custom)
    }
}

/// Replayable list of moves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub steps: Vec<MoveStep>,
}

impl MoveRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn moves(&self) -> impl Iterator<Item = &Move> {
        self.steps.iter().map(|s| &s.mv)
    }

    /// Applies `mv` to `x`, appending the step, and returns the result.
    pub fn push(&mut self, x: &MultibranchedSurface, mv: Move) -> Result<MultibranchedSurface> {
        let y = apply_move(x, &mv)?;
        self.steps.push(MoveStep {
            mv,
            before: canonical_hash(x, SymmetryMode::Rotational),
            after: canonical_hash(&y, SymmetryMode::Rotational),
        });
        Ok(y)
    }

    /// Replays every move from `initial`, checking the recorded hashes.
    pub fn replay(&self, initial: &MultibranchedSurface) -> Result<MultibranchedSurface> {
        let mut x = initial.clone();
        for (i, step) in self.steps.iter().enumerate() {
            let h = canonical_hash(&x, SymmetryMode::Rotational);
            if h != step.before {
                return Err(Error::Replay(format!(
                    "step {i}: hash before is {h:016x}, recorded {:016x}",
                    step.before
                )));
            }
            x = apply_move(&x, &step.mv).map_err(|e| Error::Replay(format!("step {i}: {e}")))?;
            let h = canonical_hash(&x, SymmetryMode::Rotational);
            if h != step.after {
                return Err(Error::Replay(format!(
                    "step {i}: hash after is {h:016x}, recorded {:016x}",
                    step.after
                )));
            }
        }
        Ok(x)
    }
}

pub fn apply_move(x: &MultibranchedSurface, mv: &Move) -> Result<MultibranchedSurface> {
    match mv {
        Move::Ix(site) => apply_ix(x, site),
        Move::Xi(choice) => apply_xi(x, choice),
    }
}

fn require_strict(x: &MultibranchedSurface) -> Result<()> {
    match x.mode {
        ValidityMode::Strict => Ok(()),
        ValidityMode::Minor => Err(Error::RequiresStrict),
    }
}

/// Cycle cut open at slot `pos`, without that slot.
fn cut_open(slots: &[CircleId], pos: usize) -> Vec<CircleId> {
    slots[pos + 1..].iter().chain(&slots[..pos]).cloned().collect()
}

/// Regions eligible for an IX-move: normal and quasi-normal annuli and
/// normal Möbius bands, in region order.
pub fn enumerate_ix(x: &MultibranchedSurface) -> Vec<IxSite> {
    let inc = x.incidence();
    x.regions
        .iter()
        .enumerate()
        .filter_map(|(ri, r)| {
            let kind = x.classify_index(ri, &inc).ok()?;
            kind.is_contractible().then(|| IxSite {
                region: r.id.clone(),
                kind,
            })
        })
        .collect()
}

/// Result of contracting a region, with provenance.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub surface: MultibranchedSurface,
    /// The locus the region was contracted onto; `None` if it ended up
    /// without slots and was dropped (minor mode only).
    pub merged: Option<LocusId>,
    /// The XI choice at `merged` that undoes the contraction.
    pub inverse: Option<XiChoice>,
    pub kind: RegionClass,
}

/// The splice shared by IX-moves and minor contractions. Degree thresholds
/// are not checked here.
pub(crate) fn contract(x: &MultibranchedSurface, ri: usize, inc: &Incidence) -> Result<Contraction> {
    let region = &x.regions[ri];
    let kind = x.classify_index(ri, inc)?;
    let ends = match kind {
        RegionClass::NormalAnnulus | RegionClass::QuasiNormalAnnulus | RegionClass::NormalMoebius => {
            x.boundary_loci(ri, inc)?
        }
        other => {
            return Err(Error::IneligibleIx {
                region: region.id.clone(),
                reason: format!("{other:?} regions cannot be contracted"),
            })
        }
    };

    // The consumed locus is identified with the surviving one through the
    // region; its circles change sign when both ends of the region agree.
    let mut flip: Vec<CircleId> = Vec::new();
    // (index of the surviving locus, its new data, index of the consumed locus, inverse split)
    let (keep, merged, drop, split) = match kind {
        RegionClass::NormalAnnulus => {
            let ((l1, p1), (l2, p2)) = (ends[0], ends[1]);
            if x.sign(&x.loci[l1].slots[p1]) == x.sign(&x.loci[l2].slots[p2]) {
                flip.extend(cut_open(&x.loci[l2].slots, p2));
            }
            let mut slots = cut_open(&x.loci[l1].slots, p1);
            let arc = slots.len();
            slots.extend(cut_open(&x.loci[l2].slots, p2));
            let merged = BranchLocus {
                id: x.loci[l1].id.clone(),
                wrapping: 1,
                slots,
            };
            (l1, merged, Some(l2), XiSplit::NormalSplit { gap_a: 0, gap_b: arc })
        }
        RegionClass::QuasiNormalAnnulus => {
            let (normal, unnormal) = if x.loci[ends[0].0].is_normal() {
                (ends[0], ends[1])
            } else {
                (ends[1], ends[0])
            };
            let (ln, pn) = normal;
            let (lu, pu) = unnormal;
            let outer = &x.loci[lu];
            let inserted = cut_open(&x.loci[ln].slots, pn);
            if x.sign(&x.loci[ln].slots[pn]) == x.sign(&outer.slots[pu]) {
                flip.extend(inserted.iter().cloned());
            }
            let len = inserted.len();
            let slots: Vec<CircleId> = outer.slots[..pu]
                .iter()
                .cloned()
                .chain(inserted)
                .chain(outer.slots[pu + 1..].iter().cloned())
                .collect();
            let merged = BranchLocus {
                id: outer.id.clone(),
                wrapping: outer.wrapping,
                slots,
            };
            (lu, merged, Some(ln), XiSplit::QuasiSplit { start: pu, len })
        }
        RegionClass::NormalMoebius => {
            let (l, p) = ends[0];
            let merged = BranchLocus {
                id: x.loci[l].id.clone(),
                wrapping: 2 * x.loci[l].wrapping,
                slots: cut_open(&x.loci[l].slots, p),
            };
            (l, merged, None, XiSplit::MoebiusSplit { cut_gap: 0 })
        }
        _ => unreachable!(),
    };

    let survives = !merged.slots.is_empty();
    let merged_id = merged.id.clone();
    let mut merged = Some(merged);
    let loci = x
        .loci
        .iter()
        .enumerate()
        .filter_map(|(i, l)| {
            if i == keep {
                merged.take().filter(|m| !m.slots.is_empty())
            } else if Some(i) == drop {
                None
            } else {
                Some(l.clone())
            }
        })
        .collect();
    let regions = x
        .regions
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != ri)
        .map(|(_, r)| r.clone())
        .collect();

    let mut surface = MultibranchedSurface::new(x.mode, regions, loci);
    surface.reversed = x.reversed.clone();
    for c in &region.boundaries {
        surface.reversed.remove(c);
    }
    let new_inc = surface.incidence();
    for c in flip {
        let orientable = new_inc
            .region_of
            .get(&c)
            .is_some_and(|&r| surface.regions[r].orientable);
        if orientable && !surface.reversed.remove(&c) {
            surface.reversed.insert(c);
        }
    }

    Ok(Contraction {
        surface,
        merged: survives.then(|| merged_id.clone()),
        inverse: survives.then_some(XiChoice {
            locus: merged_id,
            split,
        }),
        kind,
    })
}

/// IX-move with provenance.
pub fn apply_ix_traced(x: &MultibranchedSurface, site: &IxSite) -> Result<Contraction> {
    require_strict(x)?;
    let ri = x.region_index(&site.region)?;
    let inc = x.incidence();
    let kind = x.classify_index(ri, &inc)?;
    if kind != site.kind {
        return Err(Error::IneligibleIx {
            region: site.region.clone(),
            reason: format!("region is {kind:?}, site says {:?}", site.kind),
        });
    }
    contract(x, ri, &inc)
}

pub fn apply_ix(x: &MultibranchedSurface, site: &IxSite) -> Result<MultibranchedSurface> {
    apply_ix_traced(x, site).map(|c| c.surface)
}

/// All XI-moves at a locus, ordered by split kind and then gap index.
pub fn enumerate_xi(x: &MultibranchedSurface, locus: &LocusId) -> Result<Vec<XiChoice>> {
    let l = x.locus(locus).ok_or_else(|| Error::UnknownLocus(locus.clone()))?;
    Ok(xi_splits(l)
        .into_iter()
        .map(|split| XiChoice {
            locus: locus.clone(),
            split,
        })
        .collect())
}

fn xi_splits(l: &BranchLocus) -> Vec<XiSplit> {
    let k = l.slots.len();
    let w = l.wrapping as usize;
    let mut out = Vec::new();
    if w == 1 {
        for a in 0..k {
            for b in a + 1..k {
                if b - a >= 2 && k - (b - a) >= 2 {
                    out.push(XiSplit::NormalSplit { gap_a: a, gap_b: b });
                }
            }
        }
    } else if k >= 2 {
        for start in 0..k {
            for len in 2..=k {
                if (k - len + 1) * w >= 3 {
                    out.push(XiSplit::QuasiSplit { start, len });
                }
            }
        }
        if w == 2 {
            out.extend((0..k).map(|cut_gap| XiSplit::MoebiusSplit { cut_gap }));
        }
    }
    out
}

/// XI-move with the id of the region it creates.
pub fn apply_xi_traced(x: &MultibranchedSurface, choice: &XiChoice) -> Result<(MultibranchedSurface, RegionId)> {
    require_strict(x)?;
    let li = x.locus_index(&choice.locus)?;
    let l = &x.loci[li];
    if !xi_splits(l).contains(&choice.split) {
        return Err(Error::IneligibleXi {
            locus: choice.locus.clone(),
            reason: format!("{:?} is not among the available splits", choice.split),
        });
    }
    let k = l.slots.len();
    let mut fresh = FreshIds::for_surface(x);
    let mut loci = x.loci.clone();
    let mut regions = x.regions.clone();
    let new_region = RegionId(fresh.next("R"));
    // the far end of a new annulus runs against its locus, so contracting
    // it again leaves every sign as it was
    let mut reversed_end = None;

    match choice.split {
        XiSplit::NormalSplit { gap_a, gap_b } => {
            let x1 = CircleId(fresh.next("c"));
            let x2 = CircleId(fresh.next("c"));
            let mut first: Vec<CircleId> = l.slots[gap_a..gap_b].to_vec();
            first.push(x1.clone());
            let mut second: Vec<CircleId> = l.slots[gap_b..].iter().chain(&l.slots[..gap_a]).cloned().collect();
            second.push(x2.clone());
            loci[li].slots = first;
            loci.insert(
                li + 1,
                BranchLocus {
                    id: LocusId(fresh.next("B")),
                    wrapping: 1,
                    slots: second,
                },
            );
            reversed_end = Some(x2.clone());
            regions.push(Region::annulus(new_region.clone(), x1, x2));
        }
        XiSplit::QuasiSplit { start, len } => {
            let x1 = CircleId(fresh.next("c"));
            let x2 = CircleId(fresh.next("c"));
            let mut arc: Vec<CircleId> = (0..len).map(|i| l.slots[(start + i) % k].clone()).collect();
            arc.push(x1.clone());
            let rest = if start + len <= k {
                let mut v = l.slots[..start].to_vec();
                v.push(x2.clone());
                v.extend_from_slice(&l.slots[start + len..]);
                v
            } else {
                let mut v: Vec<CircleId> = (len..k).map(|i| l.slots[(start + i) % k].clone()).collect();
                v.push(x2.clone());
                v
            };
            loci[li].slots = rest;
            loci.insert(
                li + 1,
                BranchLocus {
                    id: LocusId(fresh.next("B")),
                    wrapping: 1,
                    slots: arc,
                },
            );
            reversed_end = Some(x2.clone());
            regions.push(Region::annulus(new_region.clone(), x1, x2));
        }
        XiSplit::MoebiusSplit { cut_gap } => {
            let m = CircleId(fresh.next("c"));
            let mut slots: Vec<CircleId> = l.slots[cut_gap..].iter().chain(&l.slots[..cut_gap]).cloned().collect();
            slots.push(m.clone());
            loci[li].slots = slots;
            loci[li].wrapping = 1;
            regions.push(Region::moebius(new_region.clone(), m));
        }
    }
    let mut y = MultibranchedSurface::new(x.mode, regions, loci);
    y.reversed = x.reversed.clone();
    y.reversed.extend(reversed_end);
    Ok((y, new_region))
}

pub fn apply_xi(x: &MultibranchedSurface, choice: &XiChoice) -> Result<MultibranchedSurface> {
    apply_xi_traced(x, choice).map(|(y, _)| y)
}

/// Every locus touching the region is non-spreadable.
pub fn is_maximally_spread_region(x: &MultibranchedSurface, region: &RegionId) -> Result<bool> {
    let r = x.region(region).ok_or_else(|| Error::UnknownRegion(region.clone()))?;
    let inc = x.incidence();
    Ok(r.boundaries
        .iter()
        .filter_map(|c| inc.slot_of.get(c))
        .all(|&(li, _)| !x.loci[li].is_spreadable()))
}

pub fn is_maximally_spread_surface(x: &MultibranchedSurface) -> bool {
    x.loci.iter().all(|l| !l.is_spreadable())
}

fn locus_potential(l: &BranchLocus) -> u64 {
    let k = l.slots.len() as u64;
    if l.is_pure() {
        0
    } else if l.is_normal() {
        k.saturating_sub(3)
    } else {
        2 * k - 3
    }
}

/// Termination potential for XI-moves: zero exactly on maximally spread
/// surfaces, strictly decreased by every XI-move and increased by every
/// IX-move.
pub fn spread_potential(x: &MultibranchedSurface) -> u64 {
    x.loci.iter().map(locus_potential).sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpreadPolicy {
    /// Always take the first XI choice of the first spreadable locus.
    #[default]
    First,
    /// Explore every XI sequence; return the result with the least
    /// rotational canonical form.
    Exhaustive,
}

pub fn maximally_spread(x: &MultibranchedSurface, policy: SpreadPolicy) -> Result<(MultibranchedSurface, MoveRecord)> {
    require_strict(x)?;
    match policy {
        SpreadPolicy::First => {
            let mut record = MoveRecord::default();
            let mut current = x.clone();
            loop {
                let next = current.loci.iter().find_map(|l| {
                    xi_splits(l).first().map(|&split| XiChoice {
                        locus: l.id.clone(),
                        split,
                    })
                });
                match next {
                    Some(choice) => current = record.push(&current, Move::Xi(choice))?,
                    None => return Ok((current, record)),
                }
            }
        }
        SpreadPolicy::Exhaustive => {
            let mut all = maximally_spread_all(x)?;
            Ok(all.swap_remove(0))
        }
    }
}

/// Every maximally spread surface reachable by XI-moves, one per rotational
/// isomorphism class, sorted by canonical form.
pub fn maximally_spread_all(x: &MultibranchedSurface) -> Result<Vec<(MultibranchedSurface, MoveRecord)>> {
    require_strict(x)?;
    let mut seen = HashSet::new();
    let mut results = Vec::new();
    let mut stack = vec![(x.clone(), MoveRecord::default())];
    seen.insert(canonical_form(x, SymmetryMode::Rotational));
    while let Some((current, record)) = stack.pop() {
        let mut terminal = true;
        for l in &current.loci {
            for split in xi_splits(l) {
                terminal = false;
                let mut rec = record.clone();
                let next = rec.push(
                    &current,
                    Move::Xi(XiChoice {
                        locus: l.id.clone(),
                        split,
                    }),
                )?;
                if seen.insert(canonical_form(&next, SymmetryMode::Rotational)) {
                    stack.push((next, rec));
                }
            }
        }
        if terminal {
            results.push((canonical_form(&current, SymmetryMode::Rotational), current, record));
        }
    }
    results.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(results.into_iter().map(|(_, x, r)| (x, r)).collect())
}

/// IX-move along a maximally spread region followed by the XI-move at the
/// merged locus that is not the inverse.
pub fn apply_ih(x: &MultibranchedSurface, site: &IxSite) -> Result<MultibranchedSurface> {
    require_strict(x)?;
    if !enumerate_ix(x).contains(site) {
        return Err(Error::IneligibleIx {
            region: site.region.clone(),
            reason: "not an IX site".into(),
        });
    }
    if !is_maximally_spread_region(x, &site.region)? {
        return Err(Error::NotMaximallySpread(site.region.clone()));
    }
    let contraction = apply_ix_traced(x, site)?;
    let merged = contraction.merged.expect("strict IX keeps the merged locus");
    let choices = enumerate_xi(&contraction.surface, &merged)?;
    if choices.len() != 2 {
        return Err(Error::ExactlyTwoViolated {
            locus: merged,
            found: choices.len(),
        });
    }
    let results = choices
        .iter()
        .map(|c| apply_xi(&contraction.surface, c))
        .collect::<Result<Vec<_>>>()?;
    let inverse = results
        .iter()
        .position(|y| are_isomorphic(y, x, SymmetryMode::Rotational).is_some())
        .ok_or(Error::InverseNotFound)?;
    Ok(results.into_iter().nth(1 - inverse).unwrap())
}
