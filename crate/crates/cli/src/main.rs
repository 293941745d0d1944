use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use monobvp_cli::{run_check, run_solve, Flags};
use monobvp_core::solvers::DEFAULT_PROBE_SEED;

/// Schwarz and Hilbert problems on the upper half space, any order at infinity.
#[derive(Parser)]
#[command(name = "monobvp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write the solution, verification and solvability reports.
    Solve(RunArgs),
    /// Report the datum class and solvability conditions without solving.
    Check(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem file (TOML).
    problem: PathBuf,
    /// Directory for the output files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Half-width of the integration cube.
    #[arg(long = "quad-R")]
    quad_r: Option<f64>,
    /// Cells per axis before refinement.
    #[arg(long)]
    quad_grid: Option<usize>,
    /// Quadrature tolerance.
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Approach steps for the boundary checks, largest first.
    #[arg(long, value_delimiter = ',')]
    probe_eps: Option<Vec<f64>>,
    /// Skip verification.
    #[arg(long)]
    no_verify: bool,
    /// Seed for the probe points.
    #[arg(long, default_value_t = DEFAULT_PROBE_SEED)]
    seed: u64,
}

impl RunArgs {
    fn flags(&self) -> Flags {
        Flags {
            out_dir: self.out_dir.clone(),
            quad_r: self.quad_r,
            quad_grid: self.quad_grid,
            quad_tol: self.quad_tol,
            probe_eps: self.probe_eps.clone(),
            no_verify: self.no_verify,
            seed: self.seed,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(a) => run_solve(&a.problem, &a.flags()),
        Command::Check(a) => run_check(&a.problem, &a.flags()),
    };
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    for f in &outcome.files {
        println!("{}", f.display());
    }
    ExitCode::from(outcome.exit_code as u8)
}
