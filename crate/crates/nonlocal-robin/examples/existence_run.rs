//! The full existence run on the reference configuration: regime
//! constants, descent from the best ray point, weak and boundary
//! residuals, and the λ = 0 control. Writes the solve artifacts to
//! ./existence_out/.
//!
//! ```bash
//! cargo run --release --example existence_run
//! ```

use nonlocal_robin::config::ProblemSpec;
use nonlocal_robin::pipeline::{run_pipeline, Stage};
use std::path::Path;

fn main() {
    let spec = ProblemSpec::preset_1d(64);
    let out = Path::new("existence_out");
    let (report, files) =
        run_pipeline(spec, &[Stage::Validate, Stage::Solve], Some(out)).unwrap();

    if let Some(h) = &report.hypotheses {
        println!("hypotheses: all pass = {}", h.all_pass());
    }
    let solve = report.solve.as_ref().expect("solve stage ran");
    println!("alpha        {:.6}", solve.regime.alpha);
    println!("lambda*      {:.6e}", solve.regime.lambda_star);
    println!("lambda       {:.6e}", solve.regime.lambda);
    println!("rho          {:.6}", solve.regime.rho);
    println!("iterations   {}", solve.result.iterations);
    println!("energy       {:.6e}  (negative: nontrivial minimizer)", solve.result.energy);
    println!("‖u‖_X        {:.6e}", solve.solution_norm.total);
    println!("gradient     {:.3e}", solve.result.gradient_norm);
    println!("weak resid   {:.3e}", solve.result.weak_residual);
    println!("boundary     {:.3e}", solve.result.boundary_residual);
    for row in &solve.rows {
        println!("  [{:?}] {}", row.verdict, row.name);
    }
    println!("\nfailures: {}", report.failures);
    for p in [&files.diagnostics, &files.solution, &files.energy_trace, &files.sphere_samples]
        .into_iter()
        .flatten()
    {
        println!("wrote {}", p.display());
    }
}
