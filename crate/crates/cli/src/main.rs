use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Exact wall-crossing transforms for CY3 invariant tables.
#[derive(Parser, Debug)]
#[command(name = "wallcross", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Geometry data checks.
    Geometry {
        #[command(subcommand)]
        action: GeometryAction,
    },
    /// PT -> DT at fixed coprime (r, D); DT -> PT with --inverse.
    Dtpt {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        inverse: bool,
    },
    /// PT -> L at fixed coprime (r, D); L -> PT with --inverse.
    Ptl {
        #[command(flatten)]
        table: TableArgs,
        /// CSV table of N_{n, beta}.
        #[arg(long)]
        ntable: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Coefficients of M((-1)^r q)^{r e}, or of M(q) when no Euler number is given.
    Macmahon {
        #[arg(long)]
        euler: Option<i64>,
        /// Takes the Euler number from a geometry file.
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        rank: i64,
        #[arg(long, default_value_t = 11)]
        qdeg: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degree-zero N_{n,0} for 1 <= n <= qdeg.
    Nzero {
        #[arg(long)]
        euler: Option<i64>,
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        qdeg: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fits F(q) G(q^{1/6}) to a fixed-beta slice and checks held-out terms.
    Rationality {
        /// Table CSV; the curve rank is read from its header.
        #[arg(long = "in")]
        input: PathBuf,
        /// The slice's 2beta, comma separated; optional for single-slice tables.
        #[arg(long)]
        beta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        min_sixn: Option<i64>,
        #[arg(long = "max-sixn")]
        max_sixn: Option<i64>,
        /// Powers of q at the top of the window kept back for verification.
        #[arg(long, default_value_t = 2)]
        heldout: i64,
        /// Largest recurrence order tried per offset class.
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the property suites and prints a pass/fail matrix.
    Selftest {
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long = "max-wb", default_value_t = 4)]
        max_wb: i64,
        #[arg(long = "max-sixn", default_value_t = 36)]
        max_sixn: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random cases per suite.
        #[arg(long, default_value_t = 10)]
        cases: usize,
        /// Mutation check: flip the sign in the product used by the bracket cross-check.
        #[arg(long)]
        inject_sign_flip: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GeometryAction {
    Validate {
        #[arg(long)]
        geometry: PathBuf,
    },
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long)]
    rank: i64,
    /// Divisor class D, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    div: String,
    #[arg(long = "max-wb", default_value_t = 6)]
    max_wb: i64,
    #[arg(long = "max-sixn", default_value_t = 36)]
    max_sixn: i64,
    /// Lowest 6n kept; defaults to the lowest entry of the input, capped at 0.
    #[arg(long, allow_hyphen_values = true)]
    min_sixn: Option<i64>,
    /// Input table CSV; standard input if omitted.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output table CSV; standard output if omitted. The report goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
