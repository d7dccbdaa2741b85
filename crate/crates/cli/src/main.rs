//! `facloc` command-line driver: solve single instances, query the
//! factor-revealing programs, and run seeded benchmark suites.

mod bench;
mod error;
mod frlp;
mod solve;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use facloc::instances::{parse_instance, Kind};

use bench::{BenchOptions, Format, Suite};
use error::CliError;
use frlp::FrlpOptions;
use solve::SolveOptions;

#[derive(Parser)]
#[command(name = "facloc", version, about = "Facility location with penalties, concave costs and inventory routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KindArg {
    Flpm,
    Ncc,
    Sirpfl,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Flpm => Kind::Flpm,
            KindArg::Ncc => Kind::Ncc,
            KindArg::Sirpfl => Kind::Sirpfl,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print a JSON run report.
    Solve {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Also compute the exact optimum by enumeration.
        #[arg(long)]
        oracle: bool,
        /// Also compute the LP relaxation bound.
        #[arg(long)]
        lp_bound: bool,
        /// Write the primal-dual events as JSON lines.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Solve a factor-revealing program and optionally check the
    /// discretization chain on random feasible points.
    Frlp {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        lambda_f: f64,
        /// Client weights; selects the weighted penalty-free program.
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<u64>>,
        #[arg(long, value_name = "N")]
        chain_check: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a seeded suite, solve each instance and compare with the
    /// exact optimum and the LP bound.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        parallel: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Fill the millis column (otherwise 0, keeping output reproducible).
        #[arg(long)]
        timing: bool,
    },
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.into()))
}

fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Solve { input, kind, oracle, lp_bound, trace, tol } => {
            let bytes = fs::read(&input).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
            let instance = parse_instance(&bytes, kind.into())?;
            let opts = SolveOptions { oracle, lp_bound, trace: trace.is_some(), tol };
            let out = solve::run(&instance, solve::digest(&bytes), &opts)?;
            if let (Some(path), Some(lines)) = (trace, out.trace) {
                let mut text = lines.join("\n");
                text.push('\n');
                fs::write(&path, text).map_err(|e| CliError::Other(anyhow::anyhow!("{}: {e}", path.display())))?;
            }
            to_json(&out.report)
        }
        Command::Frlp { k, lambda_f, m, chain_check, eps, seed } => {
            to_json(&frlp::run(&FrlpOptions { k, lambda_f, m, chain_check, eps, seed })?)
        }
        Command::Bench { suite, count, seed, parallel, format, timing } => {
            let report = bench::run(&BenchOptions { suite, count, seed, parallel, timing })?;
            match format {
                Format::Csv => bench::to_csv(&report),
                Format::Json => to_json(&report),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("facloc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
