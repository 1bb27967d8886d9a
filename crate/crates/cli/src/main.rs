//! `slmf`: base certification, completion and census tools for the
//! algebraic matroid of rank-bounded matrices.
//!
//! Exit codes: 0 positive answer, 1 negative answer (or data that is not
//! generic enough), 2 malformed input, violated preconditions, exceeded
//! ceilings, or internal disagreement between independent checks.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "slmf",
    version,
    about = "Linkage matching field supports and low-rank completion"
)]
struct Cli {
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OracleArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = slmf_core::DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, default_value_t = slmf_core::oracle::DEFAULT_TRIALS)]
    trials: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKind {
    /// GF(2^31 - 1)
    Gf,
    Rational,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterKind {
    /// Base size and every degree at least r + 1.
    BaseMindeg,
    /// Base size only; patterns are classified after reduction.
    BaseSize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Search,
    Pack,
}

#[derive(Subcommand)]
enum Command {
    /// Check the union condition on an (r, m)-SLMF with two independent checkers.
    CheckSlmf {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Check the relaxed (nu, r, m) counting inequalities.
    CheckRelaxed {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        r: usize,
        /// Defaults to r.
        #[arg(long)]
        nu: Option<usize>,
    },
    /// Split the columns into r relaxed (1, r, m)-SLMFs.
    Partition {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = Method::Search)]
        method: Method,
        /// Keep searching for groups that all induce the same SLMF.
        #[arg(long)]
        prefer_same_phi: bool,
    },
    /// Reduce, check, partition and run the oracle; exit 0 iff all agree on "base".
    Certify {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Complete observed entries to the unique rank-r matrix.
    Complete {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        /// CSV lines "i,j,value" with 1-based indices.
        #[arg(long)]
        observations: PathBuf,
        #[arg(long, value_enum, default_value_t = FieldKind::Gf)]
        field: FieldKind,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Compare the combinatorial conditions with the oracle on every pattern up to symmetry.
    VerifyConjecture {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Only columns of exactly this many rows.
        #[arg(long)]
        col_size: Option<usize>,
        #[arg(long, value_enum, default_value_t = FilterKind::BaseMindeg)]
        filter: FilterKind,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Write counterexample bundles (JSON) here.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Compare the oracle with the tree (r = 1) or K_{k,k} (r = min(m, n) - 1) criteria.
    Crosscheck {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        oracle: OracleArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = commands::run(cli.command);
    if !outcome.stdout.is_empty() {
        print!("{}", outcome.stdout);
    }
    if !outcome.stderr.is_empty() {
        eprintln!("{}", outcome.stderr.trim_end());
    }
    ExitCode::from(outcome.code)
}
