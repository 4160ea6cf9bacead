//! `mbs`: command-line front end for multibranched surface calculus.
//!
//! Results go to stdout as JSON. Errors go to stderr as JSON. Exit codes:
//! 0 success, 1 negative verdict, 2 usage or input error, 3 budget
//! exhausted.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mbs_core::moves::SpreadPolicy;
use mbs_core::{SymmetryMode, ValidityMode};

#[derive(Parser, Debug)]
#[command(name = "mbs", version, about = "Multibranched surface calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a surface document against the validity rules.
    Validate { file: PathBuf },
    /// Euler characteristic, homology and locus data.
    Invariants { file: PathBuf },
    /// Enumerate or apply IX/XI moves.
    #[command(subcommand)]
    Moves(MovesCommand),
    /// Apply XI moves until the surface is maximally spread.
    Normalize { file: PathBuf },
    /// Decide isomorphism under the chosen symmetry.
    Iso { a: PathBuf, b: PathBuf },
    /// Search for a move sequence between two surfaces.
    Equiv { a: PathBuf, b: PathBuf },
    /// Search for a reduction chain showing X is a minor of Y.
    Minor { x: PathBuf, y: PathBuf },
    /// Obstruction screens.
    Screen { file: PathBuf },
    /// Build a named fixture, e.g. `theta(3)`, `mb`, `qn`, `closed_surface(true, 1)`.
    Gen { name: String },
    /// A random surface, or a random walk of moves from FILE.
    Rand { file: Option<PathBuf> },
}

#[derive(Subcommand, Debug)]
enum MovesCommand {
    /// All IX sites and XI choices.
    List { file: PathBuf },
    /// Apply moves given as JSON text or a file: one move, a list, or a
    /// recorded move sequence.
    Apply { file: PathBuf, moves: String },
}

#[derive(Args, Debug, Clone)]
struct Options {
    /// Override the validity mode of inputs, or pick it for generated surfaces.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Symmetry used to compare surfaces.
    #[arg(long, global = true, value_enum)]
    symmetry: Option<SymmetryArg>,
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    #[arg(long, global = true)]
    max_states: Option<usize>,
    #[arg(long, global = true)]
    max_cells: Option<usize>,
    /// Search time limit in seconds.
    #[arg(long, global = true)]
    time_limit: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Random walk length.
    #[arg(long, global = true, default_value_t = 4)]
    length: usize,
    /// Cell budget of random surfaces.
    #[arg(long, global = true, default_value_t = 20)]
    size: usize,
    #[arg(long, global = true, value_enum, default_value_t = PolicyArg::First)]
    policy: PolicyArg,
    /// Also write the move record of surface-producing commands here.
    #[arg(long, global = true)]
    record: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Strict,
    Minor,
}

impl From<ModeArg> for ValidityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => ValidityMode::Strict,
            ModeArg::Minor => ValidityMode::Minor,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SymmetryArg {
    Rotational,
    Mirror,
    DihedralPerLocus,
}

impl From<SymmetryArg> for SymmetryMode {
    fn from(s: SymmetryArg) -> Self {
        match s {
            SymmetryArg::Rotational => SymmetryMode::Rotational,
            SymmetryArg::Mirror => SymmetryMode::Mirror,
            SymmetryArg::DihedralPerLocus => SymmetryMode::DihedralPerLocus,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PolicyArg {
    First,
    Exhaustive,
}

impl From<PolicyArg> for SpreadPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::First => SpreadPolicy::First,
            PolicyArg::Exhaustive => SpreadPolicy::Exhaustive,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(done) => {
            print!("{}", done.stdout);
            ExitCode::from(done.code)
        }
        Err(e) => {
            eprint!("{}", output::error_json(&e));
            ExitCode::from(2)
        }
    }
}
