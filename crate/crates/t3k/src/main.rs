use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use t3k::cli::{dispatch, Subcommand as Task};
use t3k::config::parse_config;
use t3k::error::Error;

#[derive(Parser)]
#[command(name = "t3k", version, about = "Cavity-mediated tunnelling through an impenetrable barrier")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory (falls back to $T3K_OUT_DIR, then the config's
    /// [output] dir, then the current directory).
    #[arg(long, env = "T3K_OUT_DIR")]
    out_dir: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Bare mode frequencies of the wells and the box.
    Modes(Common),
    /// Atom-cavity coupling overlaps per box mode.
    Couplings(Common),
    /// Eigenvalues of the truncated Hamiltonian.
    Spectrum(Common),
    /// Exact time evolution of the tunnelling observables.
    Evolve(Common),
    /// Level splitting: series vs closed form.
    #[command(name = "delta-e")]
    DeltaE(Common),
    /// Non-local kernel heat map and the two-mode evolution.
    Kernel(Common),
    /// Parameter sweep of the splitting.
    Sweep(Common),
    /// SI-units experiment feasibility report.
    Feasibility(Common),
}

fn run() -> Result<String, Error> {
    let args = Args::parse();
    let (task, common) = match &args.command {
        Command::Modes(c) => (Task::Modes, c),
        Command::Couplings(c) => (Task::Couplings, c),
        Command::Spectrum(c) => (Task::Spectrum, c),
        Command::Evolve(c) => (Task::Evolve, c),
        Command::DeltaE(c) => (Task::DeltaE, c),
        Command::Kernel(c) => (Task::Kernel, c),
        Command::Sweep(c) => (Task::Sweep, c),
        Command::Feasibility(c) => (Task::Feasibility, c),
    };
    let text = std::fs::read_to_string(&common.config)
        .map_err(|source| Error::Io { path: common.config.display().to_string(), source })?;
    let cfg = parse_config(&text, &common.config.display().to_string())?;
    let outcome = dispatch(task, &cfg, common.out_dir.as_deref())?;
    Ok(outcome.summary)
}

fn main() -> ExitCode {
    match run() {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
