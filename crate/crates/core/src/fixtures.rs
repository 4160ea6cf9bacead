//! Named test surfaces and a seeded random generator.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{BranchLocus, CircleId, MultibranchedSurface, Region, ValidityMode};

/// The named fixtures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    /// Two normal loci joined by `n` annuli, slots in order `1..n` on both.
    Theta(usize),
    /// A Möbius band and a closing annulus on one tribranched normal locus.
    Mb,
    /// A quasi-normal annulus between a tribranched normal locus and a pure
    /// locus of wrapping 3, plus a closing annulus on the normal locus.
    Qn,
    /// One closed region and no loci (minor mode only).
    ClosedSurface { orientable: bool, genus: u32 },
}

impl Fixture {
    /// Parses `theta(4)`, `theta4`, `mb`, `qn`, `closed_surface(false,2)`.
    pub fn parse(name: &str) -> Result<Fixture> {
        let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = compact.to_ascii_lowercase();
        let (head, args) = match lower.find('(') {
            Some(i) if lower.ends_with(')') => (&lower[..i], Some(&lower[i + 1..lower.len() - 1])),
            Some(_) => return Err(Error::UnknownFixture(name.to_owned())),
            None => (lower.as_str(), None),
        };
        let bad = |msg: &str| Error::FixtureParameters(format!("{name}: {msg}"));
        match (head, args) {
            ("mb", None) => Ok(Fixture::Mb),
            ("qn", None) => Ok(Fixture::Qn),
            ("theta", Some(a)) => a.parse().map(Fixture::Theta).map_err(|_| bad("expected theta(n)")),
            (h, None) if h.starts_with("theta") && h.len() > 5 => {
                h[5..].parse().map(Fixture::Theta).map_err(|_| bad("expected theta(n)"))
            }
            ("closed_surface", Some(a)) => {
                let parts: Vec<&str> = a.split(',').collect();
                if parts.len() != 2 {
                    return Err(bad("expected closed_surface(orientable, genus)"));
                }
                let orientable = parts[0].parse().map_err(|_| bad("orientable must be true or false"))?;
                let genus = parts[1]
                    .parse()
                    .map_err(|_| bad("genus must be a non-negative integer"))?;
                Ok(Fixture::ClosedSurface { orientable, genus })
            }
            _ => Err(Error::UnknownFixture(name.to_owned())),
        }
    }

    pub fn build(self, mode: ValidityMode) -> Result<MultibranchedSurface> {
        let x = match self {
            Fixture::Theta(n) => {
                if n == 0 || (mode == ValidityMode::Strict && n < 3) {
                    return Err(Error::FixtureParameters(format!(
                        "theta({n}) needs n >= 3 in strict mode and n >= 1 in minor mode"
                    )));
                }
                theta_surface(n, mode)
            }
            Fixture::Mb => mb().with_mode(mode),
            Fixture::Qn => qn().with_mode(mode),
            Fixture::ClosedSurface { orientable, genus } => {
                if mode == ValidityMode::Strict {
                    return Err(Error::FixtureParameters(
                        "closed surfaces exist only in minor mode".into(),
                    ));
                }
                if !orientable && genus == 0 {
                    return Err(Error::FixtureParameters(
                        "a non-orientable surface needs crosscap number >= 1".into(),
                    ));
                }
                closed_surface(orientable, genus)
            }
        };
        Ok(x)
    }
}

/// `build_fixture` by name.
pub fn build_fixture(name: &str, mode: ValidityMode) -> Result<MultibranchedSurface> {
    Fixture::parse(name)?.build(mode)
}

/// The theta complex on `n` annuli without parameter checks. Circle `ai` sits at slot `i` of
/// `B1`, circle `bi` at slot `i` of `B2`; region `Ri` has boundary `[ai, bi]`.
pub fn theta_surface(n: usize, mode: ValidityMode) -> MultibranchedSurface {
    let regions = (1..=n)
        .map(|i| Region::annulus(format!("R{i}"), format!("a{i}"), format!("b{i}")))
        .collect();
    let b1 = BranchLocus::new("B1", 1, (1..=n).map(|i| format!("a{i}")));
    let b2 = BranchLocus::new("B2", 1, (1..=n).map(|i| format!("b{i}")));
    MultibranchedSurface::new(mode, regions, vec![b1, b2])
}

/// The theta complex in strict mode: `n` annuli between two normal loci.
pub fn theta(n: usize) -> MultibranchedSurface {
    theta_surface(n, ValidityMode::Strict)
}

/// A Möbius band and a closing annulus on one normal locus of degree 3.
pub fn mb() -> MultibranchedSurface {
    MultibranchedSurface::new(
        ValidityMode::Strict,
        vec![Region::moebius("M", "m"), Region::annulus("C", "c1", "c2")],
        vec![BranchLocus::new("B", 1, ["m", "c1", "c2"])],
    )
}

/// A quasi-normal annulus from a normal locus to a pure locus of wrapping
/// 3, plus a closing annulus on the normal locus.
pub fn qn() -> MultibranchedSurface {
    MultibranchedSurface::new(
        ValidityMode::Strict,
        vec![Region::annulus("A", "a", "a2"), Region::annulus("C", "c1", "c2")],
        vec![
            BranchLocus::new("Bn", 1, ["a", "c1", "c2"]),
            BranchLocus::new("Bp", 3, ["a2"]),
        ],
    )
}

/// A closed surface as a minor-mode complex with no loci.
pub fn closed_surface(orientable: bool, genus: u32) -> MultibranchedSurface {
    MultibranchedSurface::new(
        ValidityMode::Minor,
        vec![Region::new("S", orientable, genus, Vec::<CircleId>::new())],
        Vec::new(),
    )
}

/// Smallest strict surface: a once-punctured torus on a pure locus of degree 3.
pub const MIN_STRICT_CELLS: usize = 3;

/// Seeded random surface whose [`cell_count`](MultibranchedSurface::cell_count)
/// is at most `size_budget`.
///
/// Generation: pick loci (wrapping and slot count, degree >= 3 in strict
/// mode), shuffle all slots, then grow regions by cutting the shuffled slot
/// list into boundary groups of size 1..=3. Groups of size 1 become punctured
/// tori or Möbius bands so no disk appears. Cyclic orders come from the
/// shuffle. Minor mode additionally allows degree 1..2 loci and closed
/// regions. Circles of orientable regions are reversed at random.
/// Attempts that overshoot the budget are retried with fewer loci.
pub fn random_surface(seed: u64, size_budget: usize, mode: ValidityMode) -> Result<MultibranchedSurface> {
    let minimum = match mode {
        ValidityMode::Strict => MIN_STRICT_CELLS,
        ValidityMode::Minor => 1,
    };
    if size_budget < minimum {
        return Err(Error::BudgetTooSmall {
            budget: size_budget,
            minimum,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..64 {
        let max_loci = (size_budget / 4).max(1);
        let max_loci = (max_loci >> (attempt / 8)).max(1);
        let n_loci = rng.random_range(1..=max_loci);
        if let Some(x) = try_random(&mut rng, n_loci, size_budget, mode) {
            return Ok(x);
        }
    }
    Ok(minimal_surface(mode))
}

fn minimal_surface(mode: ValidityMode) -> MultibranchedSurface {
    match mode {
        ValidityMode::Strict => MultibranchedSurface::new(
            mode,
            vec![Region::new("R1", true, 1, ["c1"])],
            vec![BranchLocus::new("B1", 3, ["c1"])],
        ),
        ValidityMode::Minor => MultibranchedSurface::new(
            mode,
            vec![Region::new("R1", true, 1, Vec::<CircleId>::new())],
            Vec::new(),
        ),
    }
}

fn random_locus_shape(rng: &mut ChaCha8Rng, mode: ValidityMode) -> (u32, usize) {
    if mode == ValidityMode::Minor && rng.random_bool(0.2) {
        // degenerate loci
        return *[(1, 1), (1, 2), (2, 1)].choose(rng).unwrap();
    }
    if rng.random_bool(0.6) {
        (1, rng.random_range(3..=5))
    } else {
        let w = rng.random_range(2..=3u32);
        let k = if w == 2 {
            rng.random_range(2..=3)
        } else {
            rng.random_range(1..=3)
        };
        (w, k)
    }
}

fn try_random(rng: &mut ChaCha8Rng, n_loci: usize, budget: usize, mode: ValidityMode) -> Option<MultibranchedSurface> {
    let shapes: Vec<(u32, usize)> = (0..n_loci).map(|_| random_locus_shape(rng, mode)).collect();
    let total_slots: usize = shapes.iter().map(|s| s.1).sum();

    let mut circles: Vec<CircleId> = (1..=total_slots).map(|i| CircleId(format!("c{i}"))).collect();
    let mut loci = Vec::with_capacity(n_loci);
    let mut next = 0;
    for (i, &(w, k)) in shapes.iter().enumerate() {
        loci.push(BranchLocus {
            id: format!("B{}", i + 1).into(),
            wrapping: w,
            slots: Vec::new(),
        });
        next += k;
    }
    debug_assert_eq!(next, total_slots);

    // region boundary groups
    circles.shuffle(rng);
    let mut regions = Vec::new();
    let mut rest = &circles[..];
    while !rest.is_empty() {
        let roll = rng.random_range(0..100);
        let size = match roll {
            0..=24 => 1,
            25..=84 => 2,
            _ => 3,
        }
        .min(rest.len());
        let (group, tail) = rest.split_at(size);
        rest = tail;
        let (orientable, genus) = match size {
            1 => {
                if rng.random_bool(0.5) {
                    (false, 1)
                } else {
                    (true, rng.random_range(1..=2))
                }
            }
            _ => match rng.random_range(0..10) {
                0 => (false, rng.random_range(1..=2)),
                1 => (true, 1),
                _ => (true, 0),
            },
        };
        regions.push(Region {
            id: format!("R{}", regions.len() + 1).into(),
            orientable,
            genus,
            boundaries: group.to_vec(),
        });
    }
    if mode == ValidityMode::Minor && rng.random_bool(0.15) {
        regions.push(Region {
            id: format!("R{}", regions.len() + 1).into(),
            orientable: rng.random_bool(0.5),
            genus: rng.random_range(1..=2),
            boundaries: Vec::new(),
        });
    }

    // slots: deal circles out in a second shuffled order
    let mut order = circles.clone();
    order.shuffle(rng);
    let mut it = order.into_iter();
    for (locus, &(_, k)) in loci.iter_mut().zip(&shapes) {
        locus.slots = it.by_ref().take(k).collect();
    }

    let reversed: Vec<CircleId> = regions
        .iter()
        .filter(|r| r.orientable)
        .flat_map(|r| r.boundaries.iter().cloned())
        .filter(|_| rng.random_bool(0.3))
        .collect();
    let x = MultibranchedSurface::new(mode, regions, loci).with_reversed(reversed);
    if x.cell_count() > budget {
        return None;
    }
    debug_assert!(x.validate().is_valid(), "{:?}", x.validate());
    Some(x)
}
