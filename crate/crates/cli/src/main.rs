use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shadowwave_core::numerics::ToleranceProfile;
use shadowwave_core::scenario::{self, RunOptions, Scenario, ScenarioError};

/// Delta-shock solutions of the droplet and drift-flux models.
#[derive(Parser)]
#[command(name = "sdw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output directory (overrides the scenario and SDW_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = ToleranceProfile::default().abs_tol)]
    tol_abs: f64,
    #[arg(long, global = true, default_value_t = ToleranceProfile::default().rel_tol)]
    tol_rel: f64,
    /// Seed for randomized property suites; deterministic runs ignore it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write CSV artifacts plus a gnuplot script.
    Run { scenario: PathBuf },
    /// Cross-check the two solvers where their regimes overlap.
    Compare { scenario: PathBuf },
    /// Parse and validate only.
    Check { scenario: PathBuf },
}

fn options(c: &Common, s: &Scenario) -> Result<RunOptions, ScenarioError> {
    for (name, v) in [("--tol-abs", c.tol_abs), ("--tol-rel", c.tol_rel)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ScenarioError::Validation {
                field: name.into(),
                message: format!("must be positive, got {v}"),
            });
        }
    }
    let tol = ToleranceProfile::new(c.tol_abs, c.tol_rel);
    Ok(RunOptions::resolve(c.out_dir.clone(), s, tol, c.quiet))
}

fn execute(cli: &Cli) -> Result<(), ScenarioError> {
    let c = &cli.common;
    match &cli.command {
        Command::Check { scenario } => {
            let s = scenario::load_scenario(scenario)?;
            let kind = match s.solver_kind() {
                Ok(_) => format!("{:?}", s.validate()?),
                Err(_) => format!("compare {:?}", s.compare_mode()?),
            };
            if !c.quiet {
                println!("ok: {kind}");
            }
        }
        Command::Run { scenario } => {
            let s = scenario::load_scenario(scenario)?;
            let opts = options(c, &s)?;
            let sum = scenario::run(&s, &opts)?;
            if !c.quiet {
                println!("{:?}: {} events, {} files in {}", sum.solver, sum.events, sum.files.len(), opts.out_dir.display());
            }
        }
        Command::Compare { scenario } => {
            let s = scenario::load_scenario(scenario)?;
            let opts = options(c, &s)?;
            let sum = scenario::compare(&s, &opts)?;
            if !c.quiet {
                println!(
                    "{:?}: max |du| = {:.3e}, max atom gap = {:.3e} ({:.2} cells), {}",
                    sum.mode,
                    sum.max_velocity_gap,
                    sum.max_atom_gap,
                    sum.max_atom_gap_cells,
                    sum.file.display()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sdw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
