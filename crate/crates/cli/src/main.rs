//! Command-line front end for root numbers, Selmer groups and the supporting
//! finite-field and local-field computations.
//!
//! Exit codes: 0 success, 1 hypothesis violated, 2 usage error,
//! 3 internal consistency failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fermat_descent::local_field::DEFAULT_PRECISION;

use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "fermat-descent", version)]
#[command(about = "Root numbers and Selmer groups of Fermat-quotient Jacobians")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// p-adic coefficient precision M for local-field computations
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    pub padic_prec: u32,

    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Worker threads for scans (default: available parallelism)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Global root number and its local factors
    RootNumber {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta: i64,
        /// Shorthand for --format json
        #[arg(long)]
        json: bool,
    },
    /// Selmer group of J_{r,1,p−r−1;δ} for the isogeny 1 − ω
    Selmer {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u64,
        #[arg(long, allow_hyphen_values = true)]
        delta: i64,
        #[arg(long, value_enum, default_value_t = SelmerMethod::Closed)]
        method: SelmerMethod,
    },
    /// Check ε = (−1)^S over 1 ≤ δ ≤ delta-max
    ParityScan {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        delta_max: u64,
        /// Fail unless at least this many admissible δ were found
        #[arg(long, default_value_t = 1)]
        min_cases: usize,
    },
    /// Fraction of p-th-power-free δ ≤ x-max with root number +1
    Density {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long)]
        x_max: u64,
        /// Write per-δ rows as CSV to this file
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include per-δ rows in the report
        #[arg(long)]
        per_delta: bool,
    },
    /// Jacobi sums at the places above ℓ, with φ_ℓ and Stickelberger checks
    Jacobi {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        ell: u64,
        /// Restrict to the triple (r, s, p−r−s)
        #[arg(long, requires = "s")]
        r: Option<u64>,
        #[arg(long, requires = "r")]
        s: Option<u64>,
    },
    /// Points of y^p = x^r(δ−x)^s over F_{ℓ^f}
    CountPoints {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        f: usize,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        s: u64,
        #[arg(long, allow_hyphen_values = true)]
        delta: i64,
    },
    /// Regularity of p via Bernoulli numbers
    Regular {
        #[arg(long)]
        p: u64,
    },
    /// Local Kummer images at Π and at the primes dividing δ
    LocalImage {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u64,
        #[arg(long, allow_hyphen_values = true)]
        delta: i64,
    },
    /// Randomized local-field self-check (uses --seed and --padic-prec)
    SelfCheck {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct TripleArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub r: u64,
    #[arg(long)]
    pub s: u64,
    #[arg(long)]
    pub t: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelmerMethod {
    Closed,
    Direct,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut global = cli.global;
    if let Command::RootNumber { json: true, .. } = cli.command {
        global.format = Format::Json;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = global.workers {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = pool.install(|| run(cli.command, &global));
    match result {
        Ok(outcome) => {
            if let Err(e) = output::emit(&outcome.report, global.format) {
                eprintln!("error: {e}");
                return ExitCode::from(e.code());
            }
            if let Some(msg) = &outcome.failure {
                eprintln!("error: {msg}");
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command, global: &Global) -> Result<commands::Outcome, commands::CliError> {
    match command {
        Command::RootNumber { triple, delta, .. } => commands::root_number(triple, delta),
        Command::Selmer {
            p,
            r,
            delta,
            method,
        } => commands::selmer(p, r, delta, method, global),
        Command::ParityScan {
            p,
            delta_max,
            min_cases,
        } => commands::parity_scan(p, delta_max, min_cases),
        Command::Density {
            triple,
            x_max,
            out,
            per_delta,
        } => commands::density(triple, x_max, out.as_deref(), per_delta),
        Command::Jacobi { p, ell, r, s } => commands::jacobi(p, ell, r.zip(s)),
        Command::CountPoints {
            p,
            ell,
            f,
            r,
            s,
            delta,
        } => commands::count_points(p, ell, f, r, s, delta),
        Command::Regular { p } => commands::regular(p),
        Command::LocalImage { p, r, delta } => commands::local_image(p, r, delta),
        Command::SelfCheck { p, samples } => commands::self_check(p, samples, global),
    }
}
