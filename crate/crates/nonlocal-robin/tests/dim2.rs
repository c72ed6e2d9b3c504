//! Two-dimensional smoke coverage: meshing, validation, operators, and a
//! small minimization all run through the same code paths as 1-d.

use nonlocal_robin::config::{
    CoefficientsConfig, DomainConfig, ExponentsConfig, FieldConfig, KernelConfig, Problem,
    ProblemSpec, SolverConfig,
};
use nonlocal_robin::exponents::validate_problem;
use nonlocal_robin::geometry::Point;
use nonlocal_robin::mesh::GridFunction;
use nonlocal_robin::operators::{divergence_check, frac_p_laplacian};
use nonlocal_robin::solver::{minimize, ExistenceRegime, Tolerances};

fn spec_2d(resolution: usize) -> ProblemSpec {
    ProblemSpec {
        dim: 2,
        s: 0.3,
        domain: DomainConfig { interior: vec![[0.0, 1.0], [0.0, 1.0]], collar_radius: Some(0.5) },
        resolution,
        exponents: ExponentsConfig {
            p: KernelConfig::Constant { value: 2.0 },
            p_bounds: None,
            q: FieldConfig::constant(1.5),
            r: FieldConfig::constant(4.0),
        },
        coefficients: CoefficientsConfig {
            v: FieldConfig::constant(1.0),
            beta: FieldConfig::constant(0.0),
            g: FieldConfig::constant(0.0),
        },
        omega0: Some(vec![[0.25, 0.75], [0.25, 0.75]]),
        lambda: Default::default(),
        solver: SolverConfig { tol_grad: 1e-6, max_iters: 400, ..Default::default() },
        seed: 7,
        deterministic: true,
        pair_budget: 4_000_000,
    }
}

#[test]
fn validates_clean() {
    let prob = Problem::resolve(spec_2d(8)).unwrap();
    let report = validate_problem(&prob);
    assert!(report.all_pass(), "failures: {:?}", report.failures());
    // s·p⁺ = 0.6 < N = 2 and p*_s = 2·2/(2 − 0.6) ≈ 2.857 > r'q = 2
}

#[test]
fn pointwise_operator_2d() {
    let prob = Problem::resolve(spec_2d(8)).unwrap();
    let outer = prob.domain.outer_box();
    let x = Point::new_2d(0.5, 0.5);
    let h = prob.mesh.h[0];
    let eps = [h, h / 2.0, h / 4.0];

    // constants are annihilated
    let pv = frac_p_laplacian(&|_: &Point| 2.0, &prob.p, prob.s, &outer, &x, &eps).unwrap();
    assert_eq!(pv.value, 0.0);

    // odd kernel cancellation for affine data at the symmetry center
    let lin = |p: &Point| 0.3 * p.coord(0) - 0.7 * p.coord(1);
    let pv = frac_p_laplacian(&lin, &prob.p, prob.s, &outer, &x, &eps).unwrap();
    assert!(pv.value.abs() < 1e-9, "odd cancellation left {}", pv.value);

    // a paraboloid peaked at x has a positive fractional Laplacian there
    let cap = |p: &Point| {
        1.0 - (p.coord(0) - 0.5).powi(2) - (p.coord(1) - 0.5).powi(2)
    };
    let pv = frac_p_laplacian(&cap, &prob.p, prob.s, &outer, &x, &eps).unwrap();
    assert!(pv.value > 0.0);
}

#[test]
fn divergence_identity_2d_refines() {
    let prob = Problem::resolve(spec_2d(8)).unwrap();
    let bump = |p: &Point| {
        let mut v = 1.0;
        for a in 0..2 {
            let t = (p.coord(a) - 0.5) / 0.35;
            v *= if t.abs() < 1.0 { (1.0 - 1.0 / (1.0 - t * t)).exp() } else { 0.0 };
        }
        v
    };
    let div = divergence_check(&bump, &prob, &[12, 32]).unwrap();
    assert!(
        div.refinement_trace[1].1 < div.refinement_trace[0].1,
        "trace {:?}",
        div.refinement_trace
    );
    assert!(div.rel_residual < 5e-2, "rel residual {}", div.rel_residual);
}

#[test]
fn small_minimization_2d() {
    let prob = Problem::resolve(spec_2d(4)).unwrap();
    let regime = ExistenceRegime::from_constants(1.5, 2.0, 1.0, 1.0, 0.5, Some(0.0));
    let tol = Tolerances { tol_grad: 1e-7, max_iters: 600 };
    let res = minimize(&prob, &regime, &tol, Some(GridFunction::from_values(
        (0..prob.mesh.n_cells()).map(|i| if prob.mesh.is_interior(i) { 0.05 } else { 0.0 }).collect(),
    )))
    .unwrap();
    assert!(res.converged);
    assert!(res.x_norm.total <= 1e-5, "‖u‖_X = {}", res.x_norm.total);
}
