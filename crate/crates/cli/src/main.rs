//! `qet`: deterministic CSV sweeps and the invariant suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 I/O or argument error.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qet_core::table::Table;
use qet_core::Exec;

use commands::{CliResult, FieldRange};

#[derive(Parser, Debug)]
#[command(name = "qet", version, about = "Quantum energy teleportation on a four-site spin model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Coupling k; energies are reported in the same units.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate rows one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug, Clone)]
struct Fields {
    /// Single field value; overrides the range.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    h_min: Option<f64>,
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    h_steps: Option<usize>,
}

impl Fields {
    fn range(&self, min: f64, max: f64, steps: usize) -> FieldRange {
        FieldRange {
            h: self.h,
            h_min: self.h_min.unwrap_or(min),
            h_max: self.h_max.unwrap_or(max),
            h_steps: self.h_steps.unwrap_or(steps),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Even-parity spectrum vs h: columns h, E_1..E_8.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fields: Fields,
    },
    /// Extracted energy and its optima vs h.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fields: Fields,
    },
    /// Second-law bound terms vs h (h > 0).
    Thermo {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fields: Fields,
    },
    /// Edge correlators of the free-fermion chain vs L.
    Chain {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fields: Fields,
        /// Single chain length; overrides --L-list.
        #[arg(long = "L")]
        l: Option<usize>,
        /// Comma-separated chain lengths.
        #[arg(long = "L-list", value_delimiter = ',')]
        l_list: Option<Vec<usize>>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Seed for the sampled checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Points per angle for the brute-force optimizer (at least 64).
        #[arg(long)]
        grid: Option<usize>,
    },
}

fn exec_for(common: &Common) -> Exec {
    if common.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn emit(common: &Common, text: &str) -> CliResult<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_table(common: &Common, table: CliResult<Table>) -> CliResult<bool> {
    emit(common, &table?.to_csv())?;
    Ok(true)
}

// L = 4 is left out so the fit covers the asymptotic range only; pass it
// explicitly to get the exact-diagonalization cross-check.
fn default_lengths() -> Vec<usize> {
    (1..=20).map(|i| 50 * i).collect()
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Spectrum { common, fields } => {
            let t = commands::spectrum(common.k, &fields.range(0.0, 3.0, 301), exec_for(&common));
            emit_table(&common, t)
        }
        Command::Sweep { common, fields } => {
            let t = commands::sweep(common.k, &fields.range(0.0, 3.0, 601), exec_for(&common));
            emit_table(&common, t)
        }
        Command::Thermo { common, fields } => {
            let t = commands::thermo(common.k, &fields.range(0.02, 3.0, 150), exec_for(&common));
            emit_table(&common, t)
        }
        Command::Chain { common, fields, l, l_list } => {
            let ls = match (l, l_list) {
                (Some(l), _) => vec![l],
                (None, Some(list)) => list,
                (None, None) => default_lengths(),
            };
            // A single h = 0.5 unless a range was asked for.
            let ranged = fields.h_min.is_some() || fields.h_max.is_some() || fields.h_steps.is_some();
            let range = if fields.h.is_none() && !ranged {
                FieldRange { h: Some(0.5), ..fields.range(0.0, 1.0, 2) }
            } else {
                fields.range(0.0, 1.0, 2)
            };
            let t = commands::chain(common.k, &range, &ls, exec_for(&common));
            emit_table(&common, t)
        }
        Command::Verify { common, seed, grid } => {
            let report = commands::verify(seed, grid, exec_for(&common))?;
            emit(&common, &report.text)?;
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qet: {e}");
            ExitCode::from(2)
        }
    }
}
