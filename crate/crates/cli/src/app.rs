//! Argument parsing and dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bench::{run_bench, BenchOptions};
use crate::commands::{analyze, approximate, design, sweep, DesignMethod, DesignRequest};
use crate::document::{ControllerFile, GainsFile, SystemFile};
use crate::error::CliError;
use crate::plot::{rows, sweep_csv, sweep_svg, write_file};
use crate::registry::{lookup, registry};

/// Environment variable overriding the number of optimizer worker threads.
pub const WORKERS_ENV: &str = "FIRSYN_WORKERS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_DESIGNED: u8 = 2;
pub const EXIT_MISMATCH: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "firsyn", version, about = "Analysis and synthesis of FIR output-feedback controllers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stabilizability, detectability, open-loop spectral radius and the
    /// parity interlacing test.
    Analyze {
        /// System document, or a built-in benchmark id (system1..system4).
        system: String,
        /// Print a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Design FIR gains of a fixed order.
    Design {
        system: String,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum)]
        method: DesignMethod,
        /// Optimizer starts per order.
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Require `rho < 1 - margin`.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Write the gains document here on success.
        #[arg(long)]
        gains: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Spectral-radius statistics for orders 0..=max-order.
    Sweep {
        system: String,
        #[arg(long)]
        max_order: usize,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; printed to stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Rectangular-window FIR approximation of a stable dynamic controller.
    Approximate {
        controller: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        gains: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Reproduce the benchmark outcomes and compare them with the registry.
    Bench {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// `FIRSYN_WORKERS` as a thread count; unset means all available cores.
pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Env { name: WORKERS_ENV, msg: e.to_string() }),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Env { name: WORKERS_ENV, msg: format!("expected a positive integer, got `{v}`") }),
        },
    }
}

/// Reads a system document, falling back to the built-in benchmarks.
pub fn load_system(arg: &str) -> Result<SystemFile, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        return SystemFile::load(path);
    }
    lookup(arg).map(|e| e.system_file()).ok_or_else(|| CliError::UnknownSystem(arg.into()))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io { path: "<stdout>".into(), msg: e.to_string() })
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<u8, CliError> {
    let workers = workers_from_env()?;
    match cmd {
        Command::Analyze { system, json } => {
            let report = analyze(&load_system(&system)?)?;
            emit(out, &if json { format!("{:#}\n", report.to_json()) } else { report.to_text() })?;
            Ok(EXIT_OK)
        }
        Command::Design { system, order, method, runs, seed, margin, gains, json } => {
            if !(0.0..1.0).contains(&margin) {
                return Err(firsyn::Error::Precondition(format!("margin must lie in [0, 1), got {margin}")).into());
            }
            let req = DesignRequest { order, method, runs, seed, margin, workers };
            let report = design(&load_system(&system)?, &req)?;
            if let (Some(path), Some(doc)) = (&gains, report.gains_file()) {
                if report.designed {
                    write_file(path, &doc.to_json())?;
                }
            }
            emit(out, &if json { format!("{:#}\n", report.to_json()) } else { report.to_text() })?;
            Ok(if report.designed { EXIT_OK } else { EXIT_NOT_DESIGNED })
        }
        Command::Sweep { system, max_order, runs, seed, csv, svg } => {
            let file = load_system(&system)?;
            let cfg = DesignRequest { order: max_order, method: DesignMethod::Direct, runs, seed, margin: 0.0, workers }
                .optimizer();
            let table = rows(&sweep(&file, max_order, &cfg)?);
            let text = sweep_csv(&table);
            match &csv {
                Some(path) => write_file(path, &text)?,
                None => emit(out, &text)?,
            }
            if let Some(path) = &svg {
                write_file(path, &sweep_svg(&format!("{}: median spectral radius", file.name), &table))?;
            }
            Ok(EXIT_OK)
        }
        Command::Approximate { controller, order, gains, json } => {
            let ctl = ControllerFile::load(&controller)?;
            let approx = approximate(&ctl.controller, order)?;
            let doc = GainsFile::new(format!("{}-fir{}", ctl.name, order), approx.gains.clone())
                .with("tail_bound", crate::commands::num(approx.tail));
            if let Some(path) = &gains {
                write_file(path, &doc.to_json())?;
            }
            if json {
                emit(out, &doc.to_json())?;
            } else {
                let mut text = format!("{} truncated to order {}\n", ctl.name, order);
                for (i, f) in approx.gains.gains().iter().enumerate() {
                    text.push_str(&format!("  F{i} = {:?}\n", f.to_rows()));
                }
                text.push_str(&format!("  tail bound: {:e}\n", approx.tail));
                emit(out, &text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Bench { out: dir, seed } => {
            let opts = BenchOptions { seed, workers, ..Default::default() };
            let report = run_bench(&registry(), &opts, dir.as_deref())?;
            emit(out, &report.to_text())?;
            Ok(report.exit_code())
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Help and version requests exit with 0, usage errors with 1.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_ERROR
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
