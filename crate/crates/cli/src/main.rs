mod commands;
mod config;
mod failure;
mod table;
mod validate;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::failure::Failure;

#[derive(Parser)]
#[command(
    name = "waveguide",
    version,
    about = "Spin-polarized Dirac wave packets in a cylindrical waveguide"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output table path, overriding `output.path`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,

    /// Run a reduced validation suite.
    #[arg(long, global = true)]
    fast: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normalizing amplitude and the z/k-space cross-check.
    Normalize,
    /// Tabulate the bispinor on a (rho, phi, z) grid.
    Field,
    /// Tabulate density and current on a (rho, phi, z) grid.
    Current,
    /// Map the axial current on the detector cross-section.
    Backflow,
    /// Run the invariant suite.
    Validate,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exact,
    Asymptotic,
    Both,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.clone());
    }
    let res = cfg.resolve()?;
    let out = cfg.output.path.clone();
    match cli.command {
        Command::Normalize => {
            let line = commands::cmd_normalize(&res)?;
            println!("{line}");
            Ok(())
        }
        Command::Field => commands::cmd_field(&cfg, &res, out.as_deref()),
        Command::Current => commands::cmd_current(&cfg, &res, out.as_deref()),
        Command::Backflow => commands::cmd_backflow(&cfg, &res, out.as_deref(), cli.mode),
        Command::Validate => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let r = validate::cmd_validate(&cfg, &res, cli.fast, &mut lock);
            lock.flush().map_err(Failure::io)?;
            r
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
