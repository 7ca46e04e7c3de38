//! `kantian`: compute and verify partial-Kantian equilibria of the built-in
//! fishing scenarios.

mod config;
mod run;
mod svg;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Settings, UsageError};
use run::Failure;

#[derive(Parser)]
#[command(
    name = "kantian",
    version,
    about = "Partial-Kantian equilibria of fishing games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write equilibrium.csv, metadata.json and plots.
    Solve(RunArgs),
    /// Cross-check a scenario against the brute-force references.
    Verify(RunArgs),
    /// Print the available scenarios.
    ListScenarios,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated output formats (csv, svg).
    #[arg(long)]
    format: Option<String>,
    /// Single group fraction instead of a sweep.
    #[arg(long)]
    alpha: Option<f64>,
    /// Continuum grid size.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Group fraction sweep as start:stop:step.
    #[arg(long)]
    sweep: Option<String>,
    /// Seed of the monotonicity probe.
    #[arg(long)]
    seed: Option<u64>,
    /// Settings as key=value, e.g. scenario=four_type alpha=0.5.
    overrides: Vec<String>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, UsageError> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.load_file(path)?;
        }
        for pair in &self.overrides {
            s.set_pair(pair)?;
        }
        if let Some(out) = &self.out {
            s.set("out", &out.to_string_lossy())?;
        }
        if let Some(f) = &self.format {
            s.set("format", f)?;
        }
        if let Some(a) = self.alpha {
            s.set("alpha", &a.to_string())?;
        }
        if let Some(n) = self.grid_n {
            s.set("grid_n", &n.to_string())?;
        }
        if let Some(sw) = &self.sweep {
            s.set("sweep", sw)?;
        }
        if let Some(seed) = self.seed {
            s.set("seed", &seed.to_string())?;
        }
        Ok(s)
    }
}

fn list_scenarios() {
    use kantian_core::scenarios::*;
    println!("{SYMMETRIC_FISHING}\tfinite\tone type, J = u^2 - (1 - ubar) u; keys: alpha, sweep, beta, tol, max_iter");
    println!("{FOUR_TYPE}\tfinite\ttypes {{1,2}}^2, J = x2 u^2 - (1 - ubar) x1 u; keys: alpha, sweep, beta, tol, max_iter");
    println!(
        "{CONTINUUM_UNIFORM}\tcontinuum\tr(t, x) = alpha; keys: alpha, sweep, grid_n, xi, n_types"
    );
    println!("{CONTINUUM_WINDOWED}\tcontinuum\tr(t, x) = alpha on |t - x| <= 0.3, t <= 0.9; keys: alpha, sweep, grid_n, xi");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, verify) = match &cli.command {
        Command::ListScenarios => {
            list_scenarios();
            return ExitCode::SUCCESS;
        }
        Command::Solve(a) => (a, false),
        Command::Verify(a) => (a, true),
    };
    let cfg = match args
        .settings()
        .and_then(|s| s.resolve(if verify { "" } else { "csv,svg" }))
    {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = if verify {
        run::verify(&cfg)
    } else {
        run::solve(&cfg)
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
