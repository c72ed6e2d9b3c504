//! Nonlocal divergence theorem under mesh refinement:
//! ∫_Ω (−Δ)^s_p u dx = −∫_CΩ 𝒩u dx for smooth compactly supported u,
//! at constant and variable kernel exponent.
//!
//! ```bash
//! cargo run --release --example divergence_theorem
//! ```

use nonlocal_robin::config::{KernelConfig, Problem, ProblemSpec};
use nonlocal_robin::geometry::Point;
use nonlocal_robin::operators::divergence_check;

fn bump(p: &Point) -> f64 {
    let t = (p.coord(0) - 0.5) / 0.35;
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn print_trace(label: &str, trace: &[(usize, f64)]) {
    println!("{label}");
    println!("  {:>6} {:>14} {:>8}", "res", "|lhs − rhs|", "order");
    let mut prev: Option<f64> = None;
    for &(res, e) in trace {
        match prev {
            Some(p) => println!("  {res:>6} {e:>14.6e} {:>8.2}", (p / e).log2()),
            None => println!("  {res:>6} {e:>14.6e} {:>8}", "-"),
        }
        prev = Some(e);
    }
}

fn main() {
    let resolutions = [32usize, 64, 128];

    let prob = Problem::preset_1d(64).unwrap();
    let div = divergence_check(&bump, &prob, &resolutions).unwrap();
    print_trace("p ≡ 2, s = 0.4:", &div.refinement_trace);
    println!(
        "  lhs {:.8e}  rhs {:.8e}  rel {:.3e}  converged {}\n",
        div.lhs, div.rhs, div.rel_residual, div.converged
    );

    let mut spec = ProblemSpec::preset_1d(64);
    spec.exponents.p = KernelConfig::Sinusoidal {
        offset: 2.0,
        amplitude: 0.2,
        frequency: 1.0,
        phase: std::f64::consts::FRAC_PI_2, // sin(t + π/2) = cos t
    };
    let prob_var = Problem::resolve(spec).unwrap();
    let div = divergence_check(&bump, &prob_var, &resolutions).unwrap();
    print_trace("p(x,y) = 2 + 0.2·cos(x+y), s = 0.4:", &div.refinement_trace);
    println!(
        "  lhs {:.8e}  rhs {:.8e}  rel {:.3e}  converged {}",
        div.lhs, div.rhs, div.rel_residual, div.converged
    );
}
