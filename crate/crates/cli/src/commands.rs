use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use mbs_core::algebra::{boundary_euler, decomposition_summary, homology_profile};
use mbs_core::document;
use mbs_core::fixtures::{build_fixture, random_surface};
use mbs_core::minors::{find_minor, obstruction_screen, MinorBudget, MinorOutcome};
use mbs_core::moves::{enumerate_ix, enumerate_xi, is_maximally_spread_surface, maximally_spread, spread_potential};
use mbs_core::search::{random_walk, search_equivalence};
use mbs_core::{
    are_isomorphic, canonical_hash, Move, MoveRecord, MultibranchedSurface, SearchBudget, SearchOutcome, SymmetryMode,
    ValidityMode,
};
use serde::Deserialize;

use crate::output::*;
use crate::{Cli, Command, MovesCommand, Options};

pub struct Done {
    pub stdout: String,
    pub code: u8,
}

impl Done {
    fn ok(stdout: String) -> Self {
        Done { stdout, code: 0 }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_input(path: &Path) -> Result<Vec<u8>> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    };
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(io)?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(io)
    }
}

fn write_record(path: &Option<PathBuf>, record: &MoveRecord) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, to_json(record)).map_err(|e| CliError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}

/// Parses a document, applying the `--mode` override.
fn load(path: &Path, opts: &Options) -> Result<MultibranchedSurface> {
    let x = document::parse(&read_input(path)?)?;
    Ok(match opts.mode {
        Some(m) => x.with_mode(m.into()),
        None => x,
    })
}

fn load_valid(path: &Path, opts: &Options) -> Result<MultibranchedSurface> {
    let x = load(path, opts)?;
    x.ensure_valid()?;
    Ok(x)
}

fn symmetry(opts: &Options, default: SymmetryMode) -> SymmetryMode {
    opts.symmetry.map_or(default, Into::into)
}

pub fn run(cli: &Cli) -> Result<Done> {
    let opts = &cli.options;
    match &cli.command {
        Command::Validate { file } => validate(file, opts),
        Command::Invariants { file } => invariants(file, opts),
        Command::Moves(MovesCommand::List { file }) => moves_list(file, opts),
        Command::Moves(MovesCommand::Apply { file, moves }) => moves_apply(file, moves, opts),
        Command::Normalize { file } => {
            let x = load_valid(file, opts)?;
            let (y, record) = maximally_spread(&x, opts.policy.into())?;
            write_record(&opts.record, &record)?;
            Ok(Done::ok(document::serialize(&y)))
        }
        Command::Iso { a, b } => iso(a, b, opts),
        Command::Equiv { a, b } => equiv(a, b, opts),
        Command::Minor { x, y } => minor(x, y, opts),
        Command::Screen { file } => {
            let x = load_valid(file, opts)?;
            Ok(Done::ok(to_json(&obstruction_screen(&x))))
        }
        Command::Gen { name } => {
            let mode = opts.mode.map_or(ValidityMode::Strict, Into::into);
            Ok(Done::ok(document::serialize(&build_fixture(name, mode)?)))
        }
        Command::Rand { file } => rand(file.as_deref(), opts),
    }
}

fn validate(file: &Path, opts: &Options) -> Result<Done> {
    let x = load(file, opts)?;
    let report = x.validate();
    let valid = report.is_valid();
    let out = ValidateReport {
        valid,
        mode: x.mode,
        violations: report
            .violations
            .into_iter()
            .map(|v| ViolationEntry {
                message: v.to_string(),
                violation: v,
            })
            .collect(),
    };
    Ok(Done {
        stdout: to_json(&out),
        code: if valid { 0 } else { 1 },
    })
}

fn invariants(file: &Path, opts: &Options) -> Result<Done> {
    let x = load_valid(file, opts)?;
    let strict = x.mode == ValidityMode::Strict;
    let report = InvariantsReport {
        mode: x.mode,
        cell_count: x.cell_count(),
        euler_characteristic: x.euler_characteristic(),
        connected_components: x.connected_components(),
        homology: (&homology_profile(&x)).into(),
        canonical_hash: format!("{:016x}", canonical_hash(&x, symmetry(opts, SymmetryMode::Rotational))),
        loci: x
            .loci
            .iter()
            .map(|l| {
                Ok(LocusEntry {
                    id: l.id.clone(),
                    profile: x.locus_profile(&l.id)?,
                })
            })
            .collect::<Result<_>>()?,
        regions: x
            .regions
            .iter()
            .map(|r| RegionEntry {
                id: r.id.to_string(),
                class: x.classify_region(&r.id).ok(),
            })
            .collect(),
        decomposition: strict.then(|| decomposition_summary(&x)).transpose()?,
        boundary_euler: strict.then(|| boundary_euler(&x)).transpose()?,
    };
    Ok(Done::ok(to_json(&report)))
}

fn moves_list(file: &Path, opts: &Options) -> Result<Done> {
    let x = load_valid(file, opts)?;
    if x.mode != ValidityMode::Strict {
        return Err(mbs_core::Error::RequiresStrict.into());
    }
    let mut xi = Vec::new();
    for l in &x.loci {
        xi.extend(enumerate_xi(&x, &l.id)?);
    }
    let report = MovesReport {
        ix: enumerate_ix(&x),
        xi,
        spread_potential: spread_potential(&x),
        maximally_spread: is_maximally_spread_surface(&x),
    };
    Ok(Done::ok(to_json(&report)))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MovesInput {
    Record(MoveRecord),
    List(Vec<Move>),
    One(Move),
}

fn moves_apply(file: &Path, moves: &str, opts: &Options) -> Result<Done> {
    let x = load_valid(file, opts)?;
    let text = match moves.trim_start().chars().next() {
        Some('{') | Some('[') => moves.as_bytes().to_vec(),
        _ => read_input(Path::new(moves))?,
    };
    let input: MovesInput = serde_json::from_slice(&text)
        .map_err(|e| CliError::Usage(format!("moves are not a move, a list of moves or a move record: {e}")))?;
    let (y, record) = match input {
        MovesInput::Record(record) => (record.replay(&x)?, record),
        MovesInput::List(list) => apply_all(&x, list)?,
        MovesInput::One(mv) => apply_all(&x, vec![mv])?,
    };
    write_record(&opts.record, &record)?;
    Ok(Done::ok(document::serialize(&y)))
}

fn apply_all(x: &MultibranchedSurface, moves: Vec<Move>) -> Result<(MultibranchedSurface, MoveRecord)> {
    let mut record = MoveRecord::default();
    let mut cur = x.clone();
    for mv in moves {
        cur = record.push(&cur, mv)?;
    }
    Ok((cur, record))
}

fn iso(a: &Path, b: &Path, opts: &Options) -> Result<Done> {
    let (x, y) = (load_valid(a, opts)?, load_valid(b, opts)?);
    let mode = symmetry(opts, SymmetryMode::Rotational);
    let certificate = are_isomorphic(&x, &y, mode);
    let report = IsoReport {
        isomorphic: certificate.is_some(),
        symmetry: mode,
        canonical_hashes: [&x, &y].map(|s| format!("{:016x}", canonical_hash(s, mode))),
        certificate,
    };
    Ok(Done {
        code: if report.isomorphic { 0 } else { 1 },
        stdout: to_json(&report),
    })
}

fn equiv(a: &Path, b: &Path, opts: &Options) -> Result<Done> {
    let (x, y) = (load_valid(a, opts)?, load_valid(b, opts)?);
    let default = SearchBudget::default();
    let budget = SearchBudget {
        max_depth: opts.max_depth.unwrap_or(default.max_depth),
        max_states: opts.max_states.unwrap_or(default.max_states),
        max_cell_count: opts.max_cells.unwrap_or(default.max_cell_count),
        time_limit: opts.time_limit.map_or(default.time_limit, Duration::from_secs),
    };
    let outcome = search_equivalence(&x, &y, &budget, symmetry(opts, SymmetryMode::Rotational))?;
    let code = match outcome {
        SearchOutcome::Found { .. } => 0,
        SearchOutcome::InvariantMismatch { .. } => 1,
        SearchOutcome::ExhaustedWithinBudget => 3,
    };
    Ok(Done {
        stdout: to_json(&outcome),
        code,
    })
}

fn minor(x: &Path, y: &Path, opts: &Options) -> Result<Done> {
    let (x, y) = (load(x, opts)?, load(y, opts)?);
    x.with_mode(ValidityMode::Minor).ensure_valid()?;
    y.with_mode(ValidityMode::Minor).ensure_valid()?;
    let default = MinorBudget::default();
    let budget = MinorBudget {
        max_states: opts.max_states.unwrap_or(default.max_states),
        symmetry: symmetry(opts, default.symmetry),
    };
    let outcome = find_minor(&x, &y, &budget);
    let code = match outcome {
        MinorOutcome::Found { .. } => 0,
        MinorOutcome::NotMinor => 1,
        MinorOutcome::BudgetExhausted => 3,
    };
    Ok(Done {
        stdout: to_json(&MinorReport {
            symmetry: budget.symmetry,
            outcome,
        }),
        code,
    })
}

fn rand(file: Option<&Path>, opts: &Options) -> Result<Done> {
    let y = match file {
        Some(file) => {
            let x = load_valid(file, opts)?;
            let (y, record) = random_walk(&x, opts.seed, opts.length)?;
            write_record(&opts.record, &record)?;
            y
        }
        None => random_surface(opts.seed, opts.size, opts.mode.map_or(ValidityMode::Strict, Into::into))?,
    };
    Ok(Done::ok(document::serialize(&y)))
}
