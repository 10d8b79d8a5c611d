//! `nilspace`: run the cubespace analyses from the command line.
//!
//! Subcommands: `check` (nilspace axioms), `translations` (translation
//! groups and the commutator law), `solve` (coboundary solvers), `lift`
//! (lift a factor translation).  Every run emits one deterministic report;
//! exit codes are 0 all-pass, 1 check failure, 2 usage or parse error,
//! 3 cap exceeded (partial report).

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use config::{build_space, ConfigError, RawConfig};
use report::{digest_inputs, Report, EXIT_USAGE};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nilspace", version, about = "Exact analyses of finite cubespaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Space definition file.
    #[arg(long)]
    spec: PathBuf,
    /// Override the dimension cap from the definition file.
    #[arg(long)]
    max_dim: Option<usize>,
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cubespace axiom checks.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate translation groups and check the commutator law.
    Translations {
        #[command(flatten)]
        common: Common,
    },
    /// Solve a coboundary equation from a cocycle table.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Cocycle table: one `cube-id value` line per cube.
        #[arg(long)]
        cocycle: PathBuf,
        /// Solver: averaging, linear, or both.
        #[arg(long, default_value = "both")]
        method: String,
    },
    /// Lift a translation of the canonical factor.
    Lift {
        #[command(flatten)]
        common: Common,
    },
}

fn usage_error(e: &ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn read_file(path: &PathBuf) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn finish(report: Report, out: &Option<PathBuf>, code: i32) -> ExitCode {
    let text = report.render();
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code as u8)
}

fn run(command: &Command) -> Result<ExitCode, ConfigError> {
    let (common, name) = match command {
        Command::Check { common } => (common, "check"),
        Command::Translations { common } => (common, "translations"),
        Command::Solve { common, .. } => (common, "solve"),
        Command::Lift { common } => (common, "lift"),
    };
    let spec_text = read_file(&common.spec)?;
    let raw = RawConfig::parse(&spec_text)?;
    let built = build_space(&raw, common.max_dim)?;

    let mut digest_parts: Vec<(&str, Vec<u8>)> = vec![
        ("command", name.as_bytes().to_vec()),
        ("spec", spec_text.as_bytes().to_vec()),
        ("seed", common.seed.to_string().into_bytes()),
        (
            "max-dim",
            common
                .max_dim
                .map(|d| d.to_string())
                .unwrap_or_default()
                .into_bytes(),
        ),
    ];
    let table_text = if let Command::Solve { cocycle, method, .. } = command {
        let text = read_file(cocycle)?;
        digest_parts.push(("cocycle", text.as_bytes().to_vec()));
        digest_parts.push(("method", method.as_bytes().to_vec()));
        Some(text)
    } else {
        None
    };
    let borrowed: Vec<(&str, &[u8])> = digest_parts
        .iter()
        .map(|(l, b)| (*l, b.as_slice()))
        .collect();
    let report = Report::new(name, &digest_inputs(&borrowed), common.seed);

    let (report, code) = match command {
        Command::Check { .. } => commands::cmd_check(&built, report, common.seed),
        Command::Translations { .. } => commands::cmd_translations(&built, &raw, report)?,
        Command::Solve { method, .. } => {
            let table = commands::parse_cocycle_table(&built, &raw, table_text.as_ref().unwrap())?;
            commands::cmd_solve(&built, &table, method, report, common.seed)
        }
        Command::Lift { .. } => commands::cmd_lift(&built, &raw, report)?,
    };
    Ok(finish(report, &common.out, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => usage_error(&e),
    }
}
