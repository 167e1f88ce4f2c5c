//! `causal-transfer`: batch analyses over scenario files.
//!
//! Exit codes: 0 allowed / feasible / verified, 2 forbidden / infeasible,
//! 1 input or usage error.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use causal_transfer::systems::{EnumerationCap, CAP_ENV_VAR};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

mod commands;
mod scenario;

#[derive(Debug)]
pub struct Failure(pub String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<causal_transfer::Error> for Failure {
    fn from(e: causal_transfer::Error) -> Self {
        Failure(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Debug, Parser)]
#[command(
    name = "causal-transfer",
    version,
    about = "Transfer-function analysis of classical systems, Bell scenarios and causal loops"
)]
struct Cli {
    /// Output format; `machine` prints deterministic JSON.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Maximum number of transfer functions to materialize.
    #[arg(long, global = true, env = CAP_ENV_VAR)]
    cap: Option<u64>,

    /// Accept floating-point probabilities and irrational angles, rounding
    /// to the simplest rational within this distance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Loop constraint for a cyclic wiring (exit 2 when forbidden).
    CheckLoop { file: PathBuf },

    /// Consistent transfer probabilities for a transition table
    /// (exit 2 when infeasible).
    ConsistentRegion {
        file: PathBuf,
        /// Restrict to local functions for the partition `A1,A2:B1,B2`.
        #[arg(long, value_name = "A:B")]
        local: Option<String>,
        /// Force a transfer function to probability zero (`id`, `not`,
        /// `const0`, `const1` or an output table like `1,0`).
        #[arg(long, value_name = "F")]
        zero: Vec<String>,
        /// Re-validate a witness or certificate from an earlier machine report.
        #[arg(long, value_name = "REPORT")]
        check: Option<PathBuf>,
    },

    /// Linear inequalities on transition probabilities implied by locality.
    DeriveInequalities {
        file: PathBuf,
        /// Partition for a plain transition table.
        #[arg(long, value_name = "A:B")]
        local: Option<String>,
    },

    /// Two simplified Bell experiments closed into a loop
    /// (exit 2 when forbidden).
    DoubleBell {
        /// Optional scenario file with a `double-bell` preset.
        file: Option<PathBuf>,
        /// Weight of each signalling channel function.
        #[arg(long)]
        epsilon: Option<String>,
        /// Link from the primed A outcome to the unprimed A setting.
        #[arg(long, value_name = "F")]
        link_a: Option<String>,
        /// Link from the unprimed B outcome to the primed B setting.
        #[arg(long, value_name = "F")]
        link_b: Option<String>,
    },

    /// Count and list the transfer functions of a layout.
    Enumerate {
        /// Input cardinalities, e.g. `3,3`.
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<usize>,
        /// Output cardinalities, e.g. `2,2`.
        #[arg(long, value_delimiter = ',', required = true)]
        outputs: Vec<usize>,
        /// Print only the counts; never limited by the cap.
        #[arg(long)]
        count_only: bool,
    },
}

/// Whether the analysis came out positive (exit 0) or negative (exit 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Negative,
}

pub struct Report {
    pub text: String,
    pub machine: Value,
    pub verdict: Verdict,
}

pub struct Options {
    pub cap: EnumerationCap,
    pub tolerance: Option<f64>,
}

fn run(cli: Cli) -> Result<Report, Failure> {
    let opts = Options {
        cap: cli.cap.map(EnumerationCap).unwrap_or_default(),
        tolerance: cli.tolerance,
    };
    if let Some(t) = opts.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure(format!(
                "--tolerance must be a non-negative number, got {t}"
            )));
        }
    }
    match cli.command {
        Command::CheckLoop { file } => commands::check_loop(&scenario::load(&file)?, &opts),
        Command::ConsistentRegion {
            file,
            local,
            zero,
            check,
        } => commands::consistent_region(
            &scenario::load(&file)?,
            local.as_deref(),
            &zero,
            check.as_deref(),
            &opts,
        ),
        Command::DeriveInequalities { file, local } => {
            commands::derive(&scenario::load(&file)?, local.as_deref(), &opts)
        }
        Command::DoubleBell {
            file,
            epsilon,
            link_a,
            link_b,
        } => {
            let file = file.map(|f| scenario::load(&f)).transpose()?;
            let overrides = commands::DoubleBellOverrides {
                epsilon,
                link_a,
                link_b,
            };
            commands::double_bell(file.as_ref(), &overrides, &opts)
        }
        Command::Enumerate {
            inputs,
            outputs,
            count_only,
        } => commands::enumerate(&inputs, &outputs, count_only, &opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(report) => {
            match format {
                Format::Text => print!("{}", report.text),
                Format::Machine => println!(
                    "{}",
                    serde_json::to_string_pretty(&report.machine).expect("reports serialize")
                ),
            }
            match report.verdict {
                Verdict::Positive => ExitCode::SUCCESS,
                Verdict::Negative => ExitCode::from(2),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
