//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod oracle;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mbs_core::algebra::{build_chain_complex, homology_profile, smith_normal_form, HomologyGroup, IntegerMatrix};
use mbs_core::fixtures::{self, random_surface};
use mbs_core::minors::{is_minor, obstruction_screen, MinorBudget, ReductionStep};
use mbs_core::model::{BranchLocus, MultibranchedSurface, Region, ValidityMode};
use mbs_core::moves::{
    apply_ih, apply_ix_traced, apply_xi, enumerate_ix, enumerate_xi, is_maximally_spread_region,
    is_maximally_spread_surface, maximally_spread, spread_potential, SpreadPolicy,
};
use mbs_core::search::{random_walk, search_equivalence, SearchBudget, SearchOutcome};
use mbs_core::{are_isomorphic, SymmetryMode};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const CORPUS_SEEDS: std::ops::RangeInclusive<u64> = 1..=200;
const CORPUS_BUDGET: usize = 30;
const MAX_WALK: usize = 6;

/// Every surface visited by the corpus walks, grouped per seed.
struct Corpus {
    walks: Vec<Vec<MultibranchedSurface>>,
}

impl Corpus {
    fn build() -> Result<Corpus, String> {
        let mut walks = Vec::new();
        for seed in CORPUS_SEEDS {
            let x =
                random_surface(seed, CORPUS_BUDGET, ValidityMode::Strict).map_err(|e| format!("seed {seed}: {e}"))?;
            if x.cell_count() > CORPUS_BUDGET {
                return Err(format!("seed {seed}: {} cells", x.cell_count()));
            }
            let length = 1 + (seed as usize % MAX_WALK);
            let (_, record) = random_walk(&x, seed, length).map_err(|e| e.to_string())?;
            let mut visited = vec![x.clone()];
            let mut cur = x;
            for mv in record.moves() {
                cur = mbs_core::moves::apply_move(&cur, mv).map_err(|e| e.to_string())?;
                visited.push(cur.clone());
            }
            walks.push(visited);
        }
        Ok(Corpus { walks })
    }

    fn surfaces(&self) -> impl Iterator<Item = &MultibranchedSurface> {
        self.walks.iter().flatten()
    }
}

type Outcome = Result<String, String>;

fn criterion_1(corpus: &Corpus) -> Outcome {
    let start = Instant::now();
    let mut moves = 0;
    for (i, walk) in corpus.walks.iter().enumerate() {
        for pair in walk.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.euler_characteristic() != b.euler_characteristic()
                || a.connected_components() != b.connected_components()
                || homology_profile(a) != homology_profile(b)
            {
                return Err(format!("seed {}: invariants changed", i + 1));
            }
            moves += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} surfaces, {moves} moves, {elapsed:.2?}", corpus.walks.len()))
}

fn criterion_2(corpus: &Corpus) -> Outcome {
    let mut loci = 0;
    for x in corpus.surfaces() {
        for l in &x.loci {
            let choices = enumerate_xi(x, &l.id).map_err(|e| e.to_string())?;
            if choices.is_empty() == l.is_spreadable() {
                return Err(format!("locus {} (w={}, k={})", l.id, l.wrapping, l.slots.len()));
            }
            loci += 1;
        }
    }
    Ok(format!("{loci} loci, 0 exceptions"))
}

/// Corpus surfaces together with their maximally spread forms.
fn with_spread_forms(corpus: &Corpus) -> Result<Vec<MultibranchedSurface>, String> {
    let mut out = Vec::new();
    for x in corpus.surfaces() {
        out.push(x.clone());
        out.push(maximally_spread(x, SpreadPolicy::First).map_err(|e| e.to_string())?.0);
    }
    Ok(out)
}

fn criterion_3(corpus: &Corpus) -> Outcome {
    let mut pool = with_spread_forms(corpus)?;
    pool.extend([fixtures::theta(3), fixtures::mb(), fixtures::qn()]);
    let mut sites = 0;
    for x in &pool {
        for site in enumerate_ix(x) {
            if !is_maximally_spread_region(x, &site.region).map_err(|e| e.to_string())? {
                continue;
            }
            let c = apply_ix_traced(x, &site).map_err(|e| e.to_string())?;
            let merged = c.merged.ok_or("merged locus vanished")?;
            let n = enumerate_xi(&c.surface, &merged).map_err(|e| e.to_string())?.len();
            if n != 2 {
                return Err(format!("site {} gives {n} XI choices", site.region));
            }
            sites += 1;
        }
    }
    if sites == 0 {
        return Err("no maximally spread sites encountered".into());
    }
    Ok(format!("{sites} maximally spread sites, 0 exceptions"))
}

fn criterion_4(corpus: &Corpus) -> Outcome {
    let mut trips = 0;
    for x in corpus.surfaces() {
        for site in enumerate_ix(x) {
            let c = apply_ix_traced(x, &site).map_err(|e| e.to_string())?;
            let inverse = c.inverse.ok_or("no inverse recorded")?;
            let back = apply_xi(&c.surface, &inverse).map_err(|e| e.to_string())?;
            if are_isomorphic(&back, x, SymmetryMode::Rotational).is_none() {
                return Err(format!("round trip through {} is not isomorphic", site.region));
            }
            trips += 1;
        }
    }
    let mut ih = 0;
    let mut pool = with_spread_forms(corpus)?;
    pool.extend([fixtures::theta(3), fixtures::mb(), fixtures::qn()]);
    for x in pool.iter().filter(|x| is_maximally_spread_surface(x)) {
        for site in enumerate_ix(x) {
            let y = apply_ih(x, &site).map_err(|e| format!("IH at {}: {e}", site.region))?;
            if !is_maximally_spread_surface(&y) {
                return Err(format!("IH at {} leaves a spreadable locus", site.region));
            }
            ih += 1;
        }
    }
    if ih == 0 {
        return Err("no IH sites encountered".into());
    }
    Ok(format!("{trips} round trips, {ih} IH moves"))
}

fn group_from(v: &Value) -> HomologyGroup {
    HomologyGroup {
        betti: v[0].as_u64().unwrap() as usize,
        torsion: v[1].as_array().unwrap().iter().map(|t| t.as_u64().unwrap()).collect(),
    }
}

fn matrix_from(v: &Value) -> Vec<Vec<i64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|e| e.as_i64().unwrap()).collect())
        .collect()
}

fn criterion_5() -> Outcome {
    let data: Value =
        serde_json::from_str(include_str!("data/fixture_chain_complexes.json")).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for (name, x) in [
        ("theta3", fixtures::theta(3)),
        ("mb", fixtures::mb()),
        ("qn", fixtures::qn()),
    ] {
        let rec = &data[name];
        let (d1, d2) = (matrix_from(&rec["d1"]), matrix_from(&rec["d2"]));
        let expected = [&rec["homology"]["h0"], &rec["homology"]["h1"], &rec["homology"]["h2"]].map(group_from);

        // the oracle works from the recorded matrices alone
        let n0 = d1.len();
        let n1 = d2.len();
        let n2 = d2[0].len();
        let (r1, f1) = oracle::rank_and_factors(&d1);
        let (r2, f2) = oracle::rank_and_factors(&d2);
        let torsion = |f: Vec<i64>| f.into_iter().filter(|&d| d != 1).map(|d| d as u64).collect::<Vec<_>>();
        let from_oracle = [
            HomologyGroup {
                betti: n0 - r1,
                torsion: torsion(f1),
            },
            HomologyGroup {
                betti: n1 - r1 - r2,
                torsion: torsion(f2),
            },
            HomologyGroup {
                betti: n2 - r2,
                torsion: vec![],
            },
        ];
        if from_oracle != expected {
            return Err(format!("{name}: oracle gives {from_oracle:?}"));
        }

        let cc = build_chain_complex(&x);
        let labels = |v: &Value| -> Vec<String> {
            v.as_array()
                .unwrap()
                .iter()
                .map(|s| s.as_str().unwrap().to_owned())
                .collect()
        };
        if cc.cells0 != labels(&rec["cells0"])
            || cc.cells1 != labels(&rec["cells1"])
            || cc.cells2 != labels(&rec["cells2"])
        {
            return Err(format!("{name}: cell labels differ from the recorded complex"));
        }
        if cc.d1.to_i64_rows() != Some(d1) || cc.d2.to_i64_rows() != Some(d2) {
            return Err(format!("{name}: boundary matrices differ from the recorded complex"));
        }
        let p = homology_profile(&x);
        if [p.h0.clone(), p.h1.clone(), p.h2.clone()] != expected {
            return Err(format!("{name}: computed {p}"));
        }
        lines.push(format!("{name}: {p}"));
    }
    Ok(lines.join("; "))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cross_checked = 0;
    for i in 0..1000 {
        let (rows, cols) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let m: Vec<Vec<i64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(-9..=9)).collect())
            .collect();
        let mat = IntegerMatrix::from_rows(&m);
        let d = smith_normal_form(&mat);
        if &(&d.u * &mat) * &d.v != d.s {
            return Err(format!("matrix {i}: U*M*V != S"));
        }
        if !d.s.is_diagonal() {
            return Err(format!("matrix {i}: S is not diagonal"));
        }
        let diag = d.s.diagonal();
        for w in diag.windows(2) {
            let ok = !w[0].is_negative()
                && if w[0].is_zero() {
                    w[1].is_zero()
                } else {
                    w[1].is_multiple_of(&w[0])
                };
            if !ok {
                return Err(format!("matrix {i}: divisibility chain broken"));
            }
        }
        for (name, t) in [("U", &d.u), ("V", &d.v)] {
            if oracle::det_bigint(t).abs() != BigInt::one() {
                return Err(format!("matrix {i}: |det {name}| != 1"));
            }
        }
        if rows.min(cols) <= 6 {
            let (_, factors) = oracle::rank_and_factors(&m);
            let got: Vec<i64> = d
                .invariant_factors()
                .iter()
                .map(|f| i64::try_from(f).unwrap())
                .collect();
            if got != factors {
                return Err(format!(
                    "matrix {i}: factors {got:?}, determinantal divisors give {factors:?}"
                ));
            }
            cross_checked += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "1000 matrices ({cross_checked} against determinantal divisors), {elapsed:.2?}"
    ))
}

fn criterion_7() -> Outcome {
    let starts = [fixtures::theta(3), fixtures::mb(), fixtures::qn()];
    let mut slowest = Duration::ZERO;
    let mut total_len = 0;
    for i in 0..50u64 {
        let x = &starts[i as usize % starts.len()];
        let length = 1 + (i as usize % 5);
        let (y, walk) = random_walk(x, 1000 + i, length).map_err(|e| e.to_string())?;
        let mut cells = x.cell_count();
        let mut cur = x.clone();
        for mv in walk.moves() {
            cur = mbs_core::moves::apply_move(&cur, mv).map_err(|e| e.to_string())?;
            cells = cells.max(cur.cell_count());
        }
        let budget = SearchBudget {
            max_depth: walk.len().max(1),
            max_states: 500_000,
            max_cell_count: cells,
            time_limit: Duration::from_secs(10),
        };
        let start = Instant::now();
        let out = search_equivalence(x, &y, &budget, SymmetryMode::Rotational).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        match out {
            SearchOutcome::Found { record } => {
                let end = record.replay(x).map_err(|e| e.to_string())?;
                if are_isomorphic(&end, &y, SymmetryMode::Rotational).is_none() {
                    return Err(format!("walk {i}: record does not reach the target"));
                }
                total_len += record.len();
            }
            other => return Err(format!("walk {i} (length {}): {other:?}", walk.len())),
        }
        if elapsed > Duration::from_secs(10) {
            return Err(format!("walk {i}: query took {elapsed:?}"));
        }
    }
    Ok(format!(
        "50 walks recovered, total length {total_len}, slowest query {slowest:.2?}"
    ))
}

fn criterion_8(corpus: &Corpus) -> Outcome {
    let mut moves = 0;
    for x in corpus.surfaces() {
        let (y, record) = maximally_spread(x, SpreadPolicy::First).map_err(|e| e.to_string())?;
        if record.len() as u64 > spread_potential(x) {
            return Err(format!(
                "{} moves exceed potential {}",
                record.len(),
                spread_potential(x)
            ));
        }
        if y.loci.iter().any(|l| l.is_spreadable()) {
            return Err("a spreadable locus remains".into());
        }
        moves += record.len();
    }
    Ok(format!("{moves} XI moves in total, all within the potential bound"))
}

fn criterion_9() -> Outcome {
    let torus = MultibranchedSurface::new(
        ValidityMode::Minor,
        vec![Region::annulus("T", "p", "q")],
        vec![BranchLocus::new("L", 1, ["p", "q"])],
    )
    .with_reversed(["q"]);
    let chain = is_minor(&torus, &fixtures::theta(3), &MinorBudget::default()).ok_or("no chain found")?;
    let shape_ok = chain.len() == 2
        && matches!(chain[0], ReductionStep::RemoveRegion { .. })
        && matches!(chain[1], ReductionStep::ContractRegion { .. });
    if !shape_ok {
        return Err(format!("unexpected chain {chain:?}"));
    }
    let klein = fixtures::closed_surface(false, 2);
    if !obstruction_screen(&klein).has_nonorientable_closed_region {
        return Err("Klein bottle not flagged".into());
    }
    Ok(format!("chain {chain:?}; Klein bottle flagged"))
}

fn main() -> ExitCode {
    let corpus = Corpus::build();
    let with_corpus = |f: fn(&Corpus) -> Outcome| -> Outcome {
        match &corpus {
            Ok(c) => f(c),
            Err(e) => Err(format!("corpus: {e}")),
        }
    };
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "move invariance", with_corpus(criterion_1)),
        (2, "spreadable iff XI", with_corpus(criterion_2)),
        (3, "exactly two XI at maximally spread sites", with_corpus(criterion_3)),
        (4, "round trip and IH", with_corpus(criterion_4)),
        (5, "fixture homology", criterion_5()),
        (6, "Smith normal form", criterion_6()),
        (7, "walks recovered by search", criterion_7()),
        (8, "normalization", with_corpus(criterion_8)),
        (9, "minor chain and screen", criterion_9()),
    ];
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
