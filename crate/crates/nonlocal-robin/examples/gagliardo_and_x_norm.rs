//! The Gagliardo seminorm, the four-part X-norm, and the equivalent
//! modular norm on sample functions.
//!
//! ```bash
//! cargo run --release --example gagliardo_and_x_norm
//! ```

use nonlocal_robin::config::Problem;
use nonlocal_robin::mesh::interpolate;
use nonlocal_robin::modular::{equivalent_norm, gagliardo_modular, x_modular, x_norm};

fn main() {
    let prob = Problem::preset_1d(64).unwrap();
    let mesh = &prob.mesh;

    let samples: Vec<(&str, nonlocal_robin::mesh::GridFunction)> = vec![
        ("constant 1", interpolate(|_| 1.0, mesh).unwrap()),
        ("two-level step", interpolate(|x| if x.coord(0) < 0.5 { 1.0 } else { 0.0 }, mesh).unwrap()),
        ("sine", interpolate(|x| (std::f64::consts::PI * x.coord(0)).sin(), mesh).unwrap()),
        (
            "tent on Ω, zero outside",
            interpolate(
                |x| {
                    let t = x.coord(0);
                    if (0.0..=1.0).contains(&t) { 1.0 - (2.0 * t - 1.0).abs() } else { 0.0 }
                },
                mesh,
            )
            .unwrap(),
        ),
    ];

    println!(
        "{:<22} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "function", "gagliardo", "seminorm", "interior", "‖·‖_X", "‖·‖ (equiv)"
    );
    for (name, u) in &samples {
        let g = gagliardo_modular(u, &prob.assembly, false, true);
        let nb = x_norm(u, &prob).unwrap();
        let eq = equivalent_norm(u, &prob).unwrap();
        println!(
            "{name:<22} {g:>12.6} {:>12.6} {:>12.6} {:>12.6} {eq:>12.6}",
            nb.seminorm, nb.interior, nb.total
        );
    }

    // homogeneity: scaling by c scales every norm by c, the modular by
    // powers between p⁻ and p⁺
    let u = &samples[2].1;
    println!("\nscaling the sine sample:");
    for c in [0.5, 2.0, 4.0] {
        let nb = x_norm(&u.scaled(c), &prob).unwrap();
        let rho = x_modular(&u.scaled(c), &prob);
        println!("  c = {c:>4}: ‖cu‖_X = {:>10.6}  ρ(cu) = {rho:>12.6}", nb.total);
    }
}
