//! Pointwise operator evaluations: the principal value of the fractional
//! p(x,y)-Laplacian over a shrinking ε-sequence, and the nonlocal normal
//! derivative at collar points.
//!
//! ```bash
//! cargo run --release --example operator_pointwise
//! ```

use nonlocal_robin::config::Problem;
use nonlocal_robin::geometry::Point;
use nonlocal_robin::operators::{frac_p_laplacian, neumann_derivative};

fn bump(p: &Point) -> f64 {
    let t = (p.coord(0) - 0.5) / 0.35;
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn main() {
    let prob = Problem::preset_1d(64).unwrap();
    let outer = prob.domain.outer_box();
    let h = prob.mesh.h[0];

    println!("(−Δ)^s_p of the smooth bump at x = 0.5 (s = 0.4, p ≡ 2):");
    let eps: Vec<f64> = (0..9).map(|k| h / 2.0f64.powi(k)).collect();
    let pv = frac_p_laplacian(&bump, &prob.p, prob.s, &outer, &Point::new_1d(0.5), &eps).unwrap();
    println!("  {:>12} {:>16}", "epsilon", "value");
    for (e, v) in &pv.trace {
        println!("  {e:>12.3e} {v:>16.10}");
    }
    println!("  converged: {}\n", pv.converged);

    // linear data at the symmetry center: odd kernel, exact cancellation
    let lin = |x: &Point| x.coord(0);
    let pv = frac_p_laplacian(&lin, &prob.p, prob.s, &outer, &Point::new_1d(0.5), &eps).unwrap();
    println!("linear u at the domain center: value = {:.3e} (odd cancellation)\n", pv.value);

    println!("𝒩u at collar points (proper integral over Ω):");
    println!("  {:>8} {:>16}", "x", "N u(x)");
    for xv in [1.25, 1.5, 1.75, -0.25, -0.5] {
        let x = Point::new_1d(xv);
        let n = neumann_derivative(&bump, &prob.p, prob.s, &prob.domain.interior, &x, h).unwrap();
        println!("  {xv:>8.2} {n:>16.10}");
    }

    // within one cell width of ∂Ω the point evaluation refuses
    let close = Point::new_1d(1.0 + 0.25 * h);
    match neumann_derivative(&bump, &prob.p, prob.s, &prob.domain.interior, &close, h) {
        Err(e) => println!("\nat x = 1 + h/4: {e}"),
        Ok(_) => unreachable!(),
    }
}
