//! Thin command-line front end over the experiment harness.
//!
//! Every capability lives in the library; this binary only parses arguments,
//! resolves configs (file path or shipped preset name), forwards to the
//! harness, and converts the outcome into an exit status: 0 exactly when
//! every check row passed.

use clap::{Parser, Subcommand};
use qclab::harness::{execute, preset_names, report, resolve_config, sweep, RunOutcome};
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable naming the default output root.
const OUT_ROOT_ENV: &str = "QCLAB_OUT_ROOT";

#[derive(Parser)]
#[command(
    name = "qclab",
    about = "Quantum-classical coupling laboratory: run experiments, sweep axes, combine reports",
    version
)]
struct Cli {
    /// Output root for run directories (falls back to $QCLAB_OUT_ROOT, then "qclab-out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one experiment from a config file or a shipped preset name.
    Run {
        /// Path to a key=value config file, or a preset name from `presets list`.
        config: String,
    },
    /// Run one experiment once per value of an axis and fit the convergence slope.
    Sweep {
        /// Path to a key=value config file, or a preset name.
        config: String,
        /// Axis specification, e.g. physics.hbar=0.5,0.25,0.125
        #[arg(long)]
        axis: String,
    },
    /// Combine the run directories under a root into one summary report.
    Report {
        /// Directory holding run subdirectories (an output root).
        dir: PathBuf,
    },
    /// Inspect the shipped preset catalog.
    Presets {
        /// Action to perform; only `list` is defined.
        action: String,
    },
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("qclab-out"))
}

fn print_outcome(outcome: &RunOutcome) {
    println!("run {} [{}] -> {}", outcome.label, outcome.kind, outcome.dir.display());
    for row in &outcome.rows {
        println!(
            "  {} {}: {:.6e} vs {:.6e}",
            if row.pass { "pass" } else { "FAIL" },
            row.name,
            row.value,
            row.limit
        );
    }
    println!("  => {}", if outcome.pass { "PASS" } else { "FAIL" });
}

fn dispatch(cli: Cli) -> qclab::Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let cfg = resolve_config(&config)?;
            let outcome = execute(&cfg, &out_root(cli.out))?;
            print_outcome(&outcome);
            Ok(outcome.pass)
        }
        Command::Sweep { config, axis } => {
            let cfg = resolve_config(&config)?;
            let outcome = sweep(&cfg, &axis, &out_root(cli.out))?;
            for run in &outcome.runs {
                print_outcome(run);
            }
            for (value, headline) in outcome.axis_values.iter().zip(&outcome.headline) {
                match headline {
                    Some(h) => println!("axis {value} -> headline {h:.6e}"),
                    None => println!("axis {value} -> headline (none)"),
                }
            }
            if let Some(slope) = outcome.slope {
                println!("fitted log-log slope {slope:.4}");
            }
            println!("combined table: {}", outcome.csv_path.display());
            println!("=> {}", if outcome.all_pass { "PASS" } else { "FAIL" });
            Ok(outcome.all_pass)
        }
        Command::Report { dir } => {
            let (text, all_pass) = report(&dir)?;
            print!("{text}");
            Ok(all_pass)
        }
        Command::Presets { action } => {
            if action != "list" {
                return Err(qclab::QcError::InvalidConfig(format!(
                    "unknown presets action {action:?}; try `presets list`"
                )));
            }
            for name in preset_names() {
                println!("{name}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
