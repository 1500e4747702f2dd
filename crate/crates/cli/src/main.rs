//! `panoptic` batch front end: one subcommand per model, configured by a
//! TOML file, writing CSV and `key=value` reports into an output directory.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use error::CliError;
use output::Output;

#[derive(Parser)]
#[command(name = "panoptic", version, about = "Mirror, objective and ion-trap models for a mirror-enclosed trapped ion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp comment so reruns are byte-identical.
    #[arg(long)]
    reproducible: bool,
    /// Worker threads (default: available cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Decay-rate modification versus NA and mirror radius.
    EmissionScan(Common),
    /// Objective focal length, wavefront and collection efficiency.
    LensReport(Common),
    /// Solve the trap electrostatics and characterize the trapping potential.
    Trap {
        #[command(flatten)]
        common: Common,
        /// Search the slot shape.
        #[arg(long)]
        optimize: bool,
        /// Null the RF field at the ion with the back-plane electrodes.
        #[arg(long)]
        compensate: bool,
    },
    /// Temperature-control simulation and thermal radius tuning.
    Thermal(Common),
}

fn prepare(common: &Common) -> Result<(Config, Output), CliError> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    let cfg = Config::load(&common.config)?;
    let dir = match &common.out {
        Some(d) => d.clone(),
        None => cfg.str_opt("output_dir")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
    };
    let out = Output::new(&dir, common.reproducible)?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::EmissionScan(c) => {
            let (cfg, mut out) = prepare(&c)?;
            commands::emission::run(&cfg, &mut out)
        }
        Command::LensReport(c) => {
            let (cfg, mut out) = prepare(&c)?;
            commands::lens::run(&cfg, &mut out)
        }
        Command::Trap { common, optimize, compensate } => {
            let (cfg, mut out) = prepare(&common)?;
            commands::trap::run(&cfg, &commands::trap::TrapFlags { optimize, compensate }, &mut out)
        }
        Command::Thermal(c) => {
            let (cfg, mut out) = prepare(&c)?;
            commands::thermal::run(&cfg, &mut out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("panoptic: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
