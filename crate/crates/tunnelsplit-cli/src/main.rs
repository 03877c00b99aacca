mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use commands::{CliError, Context};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "tunnelsplit", version, about = "Riemann-surface topology, action integrals and tunnelling splittings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output_dir in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Quadrature tolerance (overrides tolerances.quadrature).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sheets, branch points, monodromy and genus of p(q).
    Topology,
    /// Action and period catalog with relation residuals.
    Actions,
    /// Splitting sweep over the 1/ħ grid.
    Splitting,
    /// Spectrum of the quantum Hamiltonian at one ħ.
    Quantum,
    /// Semiclassical against exact splittings over the grid.
    Compare,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = commands::load(&path)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let name = match cli.command {
        Command::Topology => "topology",
        Command::Actions => "actions",
        Command::Splitting => "splitting",
        Command::Quantum => "quantum",
        Command::Compare => "compare",
    };
    let ctx = Context::new(cfg, cli.out, cli.tol, name)?;
    match cli.command {
        Command::Topology => commands::topology_cmd(&ctx),
        Command::Actions => commands::actions_cmd(&ctx),
        Command::Splitting => commands::splitting_cmd(&ctx),
        Command::Quantum => commands::quantum_cmd(&ctx),
        Command::Compare => commands::compare_cmd(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
