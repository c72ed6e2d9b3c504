//! Luxemburg norms: closed forms at constant exponent, bracketing and
//! bisection at variable exponent, and the Hölder pairing.
//!
//! ```bash
//! cargo run --release --example luxemburg_norms
//! ```

use nonlocal_robin::config::Problem;
use nonlocal_robin::exponents::{Region, ScalarExpr, ScalarField};
use nonlocal_robin::mesh::{interpolate, CellRegion};
use nonlocal_robin::modular::{holder_pairing, lebesgue_modular, lebesgue_norm};

fn main() {
    let prob = Problem::preset_1d(256).unwrap();
    let mesh = &prob.mesh;

    // p ≡ 2: the Luxemburg norm is the L² norm; u(x) = x gives 1/√3
    let p2 = ScalarField::constant(2.0, Region::Interior);
    let ident = interpolate(|x| x.coord(0), mesh).unwrap();
    let norm = lebesgue_norm(&ident, mesh, &p2, None, Region::Interior).unwrap();
    println!("‖x‖_L²(0,1)           = {norm:.10}   (1/√3 = {:.10})", (1.0f64 / 3.0).sqrt());

    // u ≡ 1 on a unit-measure domain has norm 1 for every exponent
    let ones = interpolate(|_| 1.0, mesh).unwrap();
    for field in [
        ScalarField::constant(2.0, Region::Interior),
        ScalarField::new(ScalarExpr::Affine { offset: 2.0, slope: [1.0, 0.0] }, Region::Interior),
        ScalarField::new(
            ScalarExpr::Sinusoidal { offset: 3.0, amplitude: 0.5, frequency: 2.0, phase: 0.4 },
            Region::Interior,
        ),
    ] {
        let n = lebesgue_norm(&ones, mesh, &field, None, Region::Interior).unwrap();
        println!("‖1‖ with p = {:28} = {n:.10}", field.expr.describe());
    }

    // variable exponent modular with a closed-form antiderivative:
    // ∫_0^1 2^{2+x} dx = 4 / ln 2
    let pvar = ScalarField::new(ScalarExpr::Affine { offset: 2.0, slope: [1.0, 0.0] }, Region::Interior);
    let twos = interpolate(|_| 2.0, mesh).unwrap();
    let modular = lebesgue_modular(&twos, mesh, &pvar, None, Region::Interior);
    println!(
        "∫ 2^(2+x) dx           = {modular:.10}   (4/ln 2 = {:.10})",
        4.0 / std::f64::consts::LN_2
    );

    // Hölder pairing under the same variable exponent
    let u = interpolate(|x| (3.1 * x.coord(0)).sin(), mesh).unwrap();
    let v = interpolate(|x| 1.0 - x.coord(0) * x.coord(0), mesh).unwrap();
    let (lhs, bound) = holder_pairing(&u, &v, mesh, &pvar, Region::Interior).unwrap();
    println!("hölder: |∫uv| = {lhs:.6}  ≤  bound {bound:.6}");

    let interior_cells = mesh.cells.iter().filter(|c| c.region == CellRegion::Interior).count();
    println!("({} interior cells)", interior_cells);
}
