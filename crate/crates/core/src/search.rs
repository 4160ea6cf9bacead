//! Bounded exploration of the move graph.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::homology_profile;
use crate::error::{Error, Result};
use crate::iso::{are_isomorphic, canonical_form, SymmetryMode};
use crate::model::{MultibranchedSurface, ValidityMode};
use crate::moves::{apply_ix, apply_xi, enumerate_ix, enumerate_xi, Move, MoveRecord};

/// Every IX result followed by every XI result, in enumeration order.
pub fn neighbors(x: &MultibranchedSurface) -> Vec<(Move, MultibranchedSurface)> {
    let mut out = Vec::new();
    for site in enumerate_ix(x) {
        if let Ok(y) = apply_ix(x, &site) {
            out.push((Move::Ix(site), y));
        }
    }
    for l in &x.loci {
        for choice in enumerate_xi(x, &l.id).unwrap_or_default() {
            if let Ok(y) = apply_xi(x, &choice) {
                out.push((Move::Xi(choice), y));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Moves per side.
    pub max_depth: usize,
    /// Distinct states over both sides.
    pub max_states: usize,
    /// Surfaces with more cells are pruned.
    pub max_cell_count: usize,
    pub time_limit: Duration,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_depth: 4,
            max_states: 200_000,
            max_cell_count: 40,
            time_limit: Duration::from_secs(60),
        }
    }
}

impl SearchBudget {
    fn check(&self) -> Result<()> {
        if self.max_depth == 0 || self.max_states == 0 || self.max_cell_count == 0 || self.time_limit.is_zero() {
            return Err(Error::Invalid("search budget fields must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    EulerCharacteristic,
    ConnectedComponents,
    H0,
    H1,
    H2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found {
        record: MoveRecord,
    },
    /// Not a verdict of non-equivalence.
    ExhaustedWithinBudget,
    InvariantMismatch {
        which: Invariant,
    },
}

/// The first invariant on which `x` and `y` differ.
pub fn invariant_mismatch(x: &MultibranchedSurface, y: &MultibranchedSurface) -> Option<Invariant> {
    if x.euler_characteristic() != y.euler_characteristic() {
        return Some(Invariant::EulerCharacteristic);
    }
    if x.connected_components() != y.connected_components() {
        return Some(Invariant::ConnectedComponents);
    }
    let (hx, hy) = (homology_profile(x), homology_profile(y));
    if hx.h0 != hy.h0 {
        Some(Invariant::H0)
    } else if hx.h1 != hy.h1 {
        Some(Invariant::H1)
    } else if hx.h2 != hy.h2 {
        Some(Invariant::H2)
    } else {
        None
    }
}

fn key(x: &MultibranchedSurface) -> Vec<u8> {
    canonical_form(x, SymmetryMode::Rotational).bytes
}

struct Node {
    surface: MultibranchedSurface,
    parent: Option<usize>,
    mv: Option<Move>,
}

struct Side {
    nodes: Vec<Node>,
    index: HashMap<Vec<u8>, usize>,
    frontier: Vec<usize>,
    depth: usize,
}

impl Side {
    fn new(roots: Vec<MultibranchedSurface>) -> Side {
        let mut side = Side {
            nodes: Vec::new(),
            index: HashMap::new(),
            frontier: Vec::new(),
            depth: 0,
        };
        for r in roots {
            let k = key(&r);
            if !side.index.contains_key(&k) {
                side.index.insert(k, side.nodes.len());
                side.frontier.push(side.nodes.len());
                side.nodes.push(Node {
                    surface: r,
                    parent: None,
                    mv: None,
                });
            }
        }
        side
    }

    fn path(&self, mut i: usize) -> Vec<Move> {
        let mut moves = Vec::new();
        while let (Some(p), Some(mv)) = (self.nodes[i].parent, &self.nodes[i].mv) {
            moves.push(mv.clone());
            i = p;
        }
        moves.reverse();
        moves
    }
}

enum Meet {
    /// X-side node equal to a Y-side node.
    Middle(usize, usize),
    /// X-side node already matching `Y` in the requested mode.
    Goal(usize),
}

/// Bidirectional breadth-first search for an IX/XI sequence from `x` to a
/// surface isomorphic to `y` in `mode`.
///
/// States are identified by their rotational canonical form. In `Mirror`
/// mode the mirror image of `y` is a second root on the far side. Only
/// surfaces within `budget.max_cell_count` are explored.
pub fn search_equivalence(
    x: &MultibranchedSurface,
    y: &MultibranchedSurface,
    budget: &SearchBudget,
    mode: SymmetryMode,
) -> Result<SearchOutcome> {
    budget.check()?;
    for s in [x, y] {
        if s.mode != ValidityMode::Strict {
            return Err(Error::RequiresStrict);
        }
        s.ensure_valid()?;
    }
    if let Some(which) = invariant_mismatch(x, y) {
        return Ok(SearchOutcome::InvariantMismatch { which });
    }
    let start = Instant::now();
    let goal = canonical_form(y, mode);
    let goal_check = mode == SymmetryMode::DihedralPerLocus;

    let mut xs = Side::new(vec![x.clone()]);
    let mut roots = vec![y.clone()];
    if mode == SymmetryMode::Mirror {
        roots.push(y.mirrored());
    }
    let mut ys = Side::new(roots);

    if canonical_form(x, mode) == goal {
        return finish(x, y, mode, &xs, &ys, Meet::Goal(0));
    }
    let mut meet = xs
        .index
        .iter()
        .find_map(|(k, &i)| ys.index.get(k).map(|&j| Meet::Middle(i, j)));

    while meet.is_none() {
        let x_open = xs.depth < budget.max_depth && !xs.frontier.is_empty();
        let y_open = ys.depth < budget.max_depth && !ys.frontier.is_empty();
        let expand_x = match (x_open, y_open) {
            (false, false) => return Ok(SearchOutcome::ExhaustedWithinBudget),
            (true, false) => true,
            (false, true) => false,
            (true, true) => xs.frontier.len() <= ys.frontier.len(),
        };
        let (side, other) = if expand_x { (&mut xs, &ys) } else { (&mut ys, &xs) };

        let expanded: Vec<Vec<(Move, MultibranchedSurface, Vec<u8>)>> = side
            .frontier
            .par_iter()
            .map(|&i| {
                neighbors(&side.nodes[i].surface)
                    .into_iter()
                    .filter(|(_, s)| s.cell_count() <= budget.max_cell_count)
                    .map(|(mv, s)| {
                        let k = key(&s);
                        (mv, s, k)
                    })
                    .collect()
            })
            .collect();

        let parents = std::mem::take(&mut side.frontier);
        side.depth += 1;
        'merge: for (&parent, batch) in parents.iter().zip(expanded) {
            for (mv, surface, k) in batch {
                if side.index.contains_key(&k) {
                    continue;
                }
                if state_count(side, other) >= budget.max_states || start.elapsed() > budget.time_limit {
                    return Ok(SearchOutcome::ExhaustedWithinBudget);
                }
                let i = side.nodes.len();
                let hit_goal = expand_x && goal_check && canonical_form(&surface, mode) == goal;
                side.index.insert(k.clone(), i);
                side.frontier.push(i);
                side.nodes.push(Node {
                    surface,
                    parent: Some(parent),
                    mv: Some(mv),
                });
                if let Some(&j) = other.index.get(&k) {
                    meet = Some(if expand_x {
                        Meet::Middle(i, j)
                    } else {
                        Meet::Middle(j, i)
                    });
                    break 'merge;
                }
                if hit_goal {
                    meet = Some(Meet::Goal(i));
                    break 'merge;
                }
            }
        }
    }
    finish(x, y, mode, &xs, &ys, meet.unwrap())
}

fn state_count(a: &Side, b: &Side) -> usize {
    a.nodes.len() + b.nodes.len()
}

/// Builds the record through the meeting point and checks it by replay.
fn finish(
    x: &MultibranchedSurface,
    y: &MultibranchedSurface,
    mode: SymmetryMode,
    xs: &Side,
    ys: &Side,
    meet: Meet,
) -> Result<SearchOutcome> {
    let (xi, yi) = match meet {
        Meet::Middle(i, j) => (i, Some(j)),
        Meet::Goal(i) => (i, None),
    };
    let mut record = MoveRecord::default();
    let mut cur = x.clone();
    for mv in xs.path(xi) {
        cur = record.push(&cur, mv)?;
    }
    // walk the far side back to its root, re-deriving each step concretely
    let mut j = yi;
    while let Some(p) = j.and_then(|j| ys.nodes[j].parent) {
        let target = key(&ys.nodes[p].surface);
        let (mv, _) = neighbors(&cur)
            .into_iter()
            .find(|(_, s)| key(s) == target)
            .ok_or_else(|| Error::Replay("no move reproduces a far-side step".into()))?;
        cur = record.push(&cur, mv)?;
        j = Some(p);
    }
    let end = record.replay(x)?;
    if are_isomorphic(&end, y, mode).is_none() {
        return Err(Error::Replay("search result does not reach the target".into()));
    }
    Ok(SearchOutcome::Found { record })
}

/// A walk of up to `length` moves, each chosen uniformly among
/// [`neighbors`]. Stops early at a surface without neighbors.
pub fn random_walk(x: &MultibranchedSurface, seed: u64, length: usize) -> Result<(MultibranchedSurface, MoveRecord)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut record = MoveRecord::default();
    let mut cur = x.clone();
    for _ in 0..length {
        let mut options = neighbors(&cur);
        if options.is_empty() {
            break;
        }
        let (mv, _) = options.swap_remove(rng.random_range(0..options.len()));
        cur = record.push(&cur, mv)?;
    }
    Ok((cur, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::moves::IxSite;
    use crate::RegionClass;

    #[test]
    fn neighbor_counts() {
        assert_eq!(neighbors(&fixtures::theta(3)).len(), 3);
        let site = IxSite {
            region: "R1".into(),
            kind: RegionClass::NormalAnnulus,
        };
        let merged = apply_ix(&fixtures::theta(3), &site).unwrap();
        let ns = neighbors(&merged);
        assert_eq!(ns.len(), 2);
        assert!(ns.iter().all(|(mv, _)| matches!(mv, Move::Xi(_))));
        assert_eq!(neighbors(&fixtures::qn()).len(), 1);
    }

    #[test]
    fn trivial_search() {
        let x = fixtures::theta(3);
        let out = search_equivalence(&x, &x, &SearchBudget::default(), SymmetryMode::Rotational).unwrap();
        assert_eq!(
            out,
            SearchOutcome::Found {
                record: MoveRecord::default()
            }
        );
    }

    #[test]
    fn homology_rejects() {
        let out = search_equivalence(
            &fixtures::theta(3),
            &fixtures::mb(),
            &SearchBudget::default(),
            SymmetryMode::Mirror,
        )
        .unwrap();
        assert_eq!(out, SearchOutcome::InvariantMismatch { which: Invariant::H1 });
    }

    #[test]
    fn walk_of_four_is_recovered() {
        let x = fixtures::theta(3);
        let (y, walk) = random_walk(&x, 7, 4).unwrap();
        assert_eq!(walk.len(), 4);
        assert_eq!(homology_profile(&y), homology_profile(&x));
        let budget = SearchBudget {
            max_depth: 4,
            ..SearchBudget::default()
        };
        match search_equivalence(&x, &y, &budget, SymmetryMode::Rotational).unwrap() {
            SearchOutcome::Found { record } => {
                assert!(record.len() <= 8);
                let end = record.replay(&x).unwrap();
                assert!(are_isomorphic(&end, &y, SymmetryMode::Rotational).is_some());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn walks_are_deterministic() {
        let x = fixtures::qn();
        assert_eq!(random_walk(&x, 3, 5).unwrap(), random_walk(&x, 3, 5).unwrap());
        let (same, empty) = random_walk(&x, 3, 0).unwrap();
        assert_eq!(same, x);
        assert!(empty.is_empty());
    }

    #[test]
    fn zero_budget_is_rejected() {
        let x = fixtures::theta(3);
        let budget = SearchBudget {
            max_depth: 0,
            ..SearchBudget::default()
        };
        assert!(search_equivalence(&x, &x, &budget, SymmetryMode::Rotational).is_err());
    }
}
