//! Thin CLI over the pipeline: validate / check / solve / report.
//!
//! Exit codes: 0 when no check fails, 1 when any verdict is `fail`,
//! 2 on configuration or runtime errors.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use nonlocal_robin::config::{load_config, LambdaConfig};
use nonlocal_robin::pipeline::{run_pipeline, Stage};

#[derive(Parser)]
#[command(name = "nlrobin", version, about = "Nonlocal Robin problem diagnostics and solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Problem configuration (JSON).
    config: PathBuf,
    /// Override the interior resolution per axis.
    #[arg(long)]
    resolution: Option<usize>,
    /// Override lambda: a number or "auto".
    #[arg(long)]
    lambda: Option<String>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Force sequential summation order.
    #[arg(long)]
    deterministic: bool,
    /// Output directory for diagnostics.json and solve artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the standing hypotheses against the configuration.
    Validate(RunArgs),
    /// Hypotheses plus the modular/operator identity suites.
    Check(RunArgs),
    /// Hypotheses plus the existence run (regime, descent, residuals).
    Solve(RunArgs),
    /// Everything: validate, check, and solve.
    Report(RunArgs),
}

fn stages_of(cmd: &Command) -> &'static [Stage] {
    match cmd {
        Command::Validate(_) => &[Stage::Validate],
        Command::Check(_) => &[Stage::Validate, Stage::Check],
        Command::Solve(_) => &[Stage::Validate, Stage::Solve],
        Command::Report(_) => &[Stage::Validate, Stage::Check, Stage::Solve],
    }
}

fn args_of(cmd: &Command) -> &RunArgs {
    match cmd {
        Command::Validate(a) | Command::Check(a) | Command::Solve(a) | Command::Report(a) => a,
    }
}

fn run() -> Result<bool, Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    let stages = stages_of(&cli.command);
    let args = args_of(&cli.command);

    let mut spec = load_config(&args.config)?;
    if let Some(r) = args.resolution {
        spec.resolution = r;
    }
    if let Some(l) = &args.lambda {
        spec.lambda = if l == "auto" {
            LambdaConfig::Keyword("auto".into())
        } else {
            LambdaConfig::Value(l.parse::<f64>()?)
        };
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if args.deterministic {
        spec.deterministic = true;
    }

    let (report, files) = run_pipeline(spec, stages, args.out.as_deref())?;

    // human-readable summary; the JSON report carries the full detail
    println!("stages: {:?}", report.stages);
    if let Some(h) = &report.hypotheses {
        for c in &h.checks {
            println!("  [{:?}] {}", c.verdict, c.name);
        }
    }
    if let Some(checks) = &report.checks {
        for row in &checks.rows {
            println!("  [{:?}] {} = {:.3e}", row.verdict, row.name, row.value);
        }
        for id in &checks.identities {
            println!(
                "  [{:?}] {}: lhs {:.6e} rhs {:.6e} rel {:.3e} converged {}",
                id.verdict,
                id.name,
                id.residual.lhs,
                id.residual.rhs,
                id.residual.rel_residual,
                id.residual.converged
            );
        }
    }
    if let Some(solve) = &report.solve {
        println!(
            "  regime: alpha {:.6} lambda* {:.6e} lambda {:.6e} rho {:.4}",
            solve.regime.alpha, solve.regime.lambda_star, solve.regime.lambda, solve.regime.rho
        );
        for row in &solve.rows {
            println!("  [{:?}] {} = {:.6e}", row.verdict, row.name, row.value);
        }
    }
    for note in &report.notes {
        println!("  note: {note}");
    }
    if let Some(p) = &files.diagnostics {
        println!("wrote {}", p.display());
    }
    for p in [&files.solution, &files.energy_trace, &files.sphere_samples].into_iter().flatten() {
        println!("wrote {}", p.display());
    }
    println!("failures: {}", report.failures);
    Ok(report.ok())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
