//! Minor calculus: region removal and contraction, the relations built from
//! them, and obstruction screens.
//!
//! Every reduction deletes exactly one region, so a reduction chain from `Y`
//! to `X` has exactly `regions(Y) - regions(X)` steps. Since `<` strictly
//! lowers the region count, `X < Y` and `Y < X` never hold together and `~`
//! coincides with isomorphism.

use std::collections::HashSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iso::{are_isomorphic, canonical_form, CanonicalForm, SymmetryMode};
use crate::model::{MultibranchedSurface, RegionClass, RegionId, ValidityMode};
use crate::moves::contract;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum ReductionStep {
    RemoveRegion { region: RegionId },
    ContractRegion { region: RegionId },
}

/// All removals in region order, then all eligible contractions.
pub fn enumerate_reductions(x: &MultibranchedSurface) -> Vec<ReductionStep> {
    let mut out: Vec<ReductionStep> = x
        .regions
        .iter()
        .map(|r| ReductionStep::RemoveRegion { region: r.id.clone() })
        .collect();
    let inc = x.incidence();
    for (ri, r) in x.regions.iter().enumerate() {
        if x.classify_index(ri, &inc).is_ok_and(RegionClass::is_contractible) {
            out.push(ReductionStep::ContractRegion { region: r.id.clone() });
        }
    }
    out
}

/// Deletes the region and excises its circles from the slot cycles. Loci
/// left without slots are deleted. The result is in minor mode.
pub fn remove_region(x: &MultibranchedSurface, region: &RegionId) -> Result<MultibranchedSurface> {
    let ri = x.region_index(region)?;
    let mut y = x.with_mode(ValidityMode::Minor);
    let gone = y.regions.remove(ri);
    for l in &mut y.loci {
        l.slots.retain(|c| !gone.boundaries.contains(c));
    }
    y.loci.retain(|l| !l.slots.is_empty());
    for c in &gone.boundaries {
        y.reversed.remove(c);
    }
    Ok(y)
}

/// The IX splice with minor-mode degrees. The result is in minor mode.
pub fn contract_region(x: &MultibranchedSurface, region: &RegionId) -> Result<MultibranchedSurface> {
    let x = x.with_mode(ValidityMode::Minor);
    let ri = x.region_index(region)?;
    let inc = x.incidence();
    match x.classify_index(ri, &inc) {
        Ok(kind) if kind.is_contractible() => {}
        _ => return Err(Error::IneligibleContraction(region.clone())),
    }
    Ok(contract(&x, ri, &inc)?.surface)
}

pub fn apply_reduction(x: &MultibranchedSurface, step: &ReductionStep) -> Result<MultibranchedSurface> {
    match step {
        ReductionStep::RemoveRegion { region } => remove_region(x, region),
        ReductionStep::ContractRegion { region } => contract_region(x, region),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorBudget {
    pub max_states: usize,
    /// Mode in which endpoints are matched.
    pub symmetry: SymmetryMode,
}

impl Default for MinorBudget {
    fn default() -> Self {
        MinorBudget {
            max_states: 100_000,
            symmetry: SymmetryMode::DihedralPerLocus,
        }
    }
}

/// A single reduction taking `y` to a surface isomorphic to `x`.
pub fn less_than(
    x: &MultibranchedSurface,
    y: &MultibranchedSurface,
    budget: &MinorBudget,
) -> Option<Vec<ReductionStep>> {
    if x.regions.len() + 1 != y.regions.len() {
        return None;
    }
    enumerate_reductions(y)
        .into_iter()
        .take(budget.max_states)
        .find_map(|step| {
            let z = apply_reduction(y, &step).ok()?;
            are_isomorphic(&z, &x.with_mode(ValidityMode::Minor), budget.symmetry).map(|_| vec![step])
        })
}

/// Isomorphic, or each a single reduction of the other.
pub fn tilde_equivalent(x: &MultibranchedSurface, y: &MultibranchedSurface, budget: &MinorBudget) -> bool {
    let (x, y) = (x.with_mode(ValidityMode::Minor), y.with_mode(ValidityMode::Minor));
    are_isomorphic(&x, &y, budget.symmetry).is_some()
        || (less_than(&x, &y, budget).is_some() && less_than(&y, &x, budget).is_some())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MinorOutcome {
    Found { chain: Vec<ReductionStep> },
    NotMinor,
    BudgetExhausted,
}

/// A chain of reductions from `y` to a surface isomorphic to `x`, found by
/// depth-first search in enumeration order. `None` is not a negative
/// verdict when the state budget runs out; see [`find_minor`].
pub fn is_minor(
    x: &MultibranchedSurface,
    y: &MultibranchedSurface,
    budget: &MinorBudget,
) -> Option<Vec<ReductionStep>> {
    match find_minor(x, y, budget) {
        MinorOutcome::Found { chain } => Some(chain),
        _ => None,
    }
}

pub fn find_minor(x: &MultibranchedSurface, y: &MultibranchedSurface, budget: &MinorBudget) -> MinorOutcome {
    let x = x.with_mode(ValidityMode::Minor);
    let y = y.with_mode(ValidityMode::Minor);
    let mut walk = Descent {
        x: &x,
        target: canonical_form(&x, budget.symmetry),
        budget,
        seen: HashSet::new(),
        chain: Vec::new(),
        states: 0,
    };
    if walk.descend(&y) {
        MinorOutcome::Found { chain: walk.chain }
    } else if walk.states > budget.max_states {
        MinorOutcome::BudgetExhausted
    } else {
        MinorOutcome::NotMinor
    }
}

struct Descent<'a> {
    x: &'a MultibranchedSurface,
    target: CanonicalForm,
    budget: &'a MinorBudget,
    seen: HashSet<Vec<u8>>,
    chain: Vec<ReductionStep>,
    states: usize,
}

impl Descent<'_> {
    fn descend(&mut self, cur: &MultibranchedSurface) -> bool {
        if cur.regions.len() < self.x.regions.len() || cur.loci.len() < self.x.loci.len() {
            return false;
        }
        if cur.regions.len() == self.x.regions.len() {
            return canonical_form(cur, self.budget.symmetry) == self.target;
        }
        if !self.seen.insert(canonical_form(cur, SymmetryMode::Rotational).bytes) {
            return false;
        }
        self.states += 1;
        if self.states > self.budget.max_states {
            return false;
        }
        for step in enumerate_reductions(cur) {
            let Ok(next) = apply_reduction(cur, &step) else {
                continue;
            };
            self.chain.push(step);
            if self.descend(&next) {
                return true;
            }
            self.chain.pop();
            if self.states > self.budget.max_states {
                return false;
            }
        }
        false
    }
}

/// Screens aligned with known obstructions to embedding in the 3-sphere.
/// These are necessary-condition checks only, not a decision procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionFlags {
    pub has_nonorientable_closed_region: bool,
    /// 1 when there are no loci.
    pub locus_wrapping_gcd: u32,
}

pub fn obstruction_screen(x: &MultibranchedSurface) -> ObstructionFlags {
    let gcd = x.loci.iter().fold(0u32, |g, l| g.gcd(&l.wrapping));
    ObstructionFlags {
        has_nonorientable_closed_region: x.regions.iter().any(|r| !r.orientable && r.boundaries.is_empty()),
        locus_wrapping_gcd: if gcd == 0 { 1 } else { gcd },
    }
}
