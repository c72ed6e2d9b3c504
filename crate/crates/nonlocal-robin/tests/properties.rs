//! Property tests for the algebraic invariants: involutions, homogeneity,
//! triangle inequality, counting identities, and the λ*-rescaling
//! equivalence of the energy.

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nonlocal_robin::config::{FieldConfig, Problem, ProblemSpec};
use nonlocal_robin::exponents::{conjugate_exponent, critical_exponent, KernelExponent};
use nonlocal_robin::geometry::{AxisBox, Point};
use nonlocal_robin::mesh::{Domain, GridFunction, Mesh};
use nonlocal_robin::modular::{equivalent_norm, x_norm};
use nonlocal_robin::operators::odd_power;
use nonlocal_robin::solver::{
    estimate_embedding_constant, minimize, ExistenceRegime, Tolerances,
};

proptest! {
    #[test]
    fn conjugate_exponent_is_an_involution(r in 1.0001f64..1e3) {
        let back = conjugate_exponent(conjugate_exponent(r).unwrap()).unwrap();
        prop_assert!((back - r).abs() <= 1e-12 * r);
    }

    // far from 1 the round trip is limited by representing 1 + 1/(r−1) in
    // f64: the conditioning bound is ~2^-53·r·(r−1)
    #[test]
    fn conjugate_exponent_involution_large_arguments(r in 1e3f64..1e8) {
        let back = conjugate_exponent(conjugate_exponent(r).unwrap()).unwrap();
        let bound = (1e-12 * r).max(8.0 * f64::EPSILON * r * (r - 1.0));
        prop_assert!((back - r).abs() <= bound);
    }

    #[test]
    fn critical_exponent_dominates_diagonal(pbar in 1.01f64..2.4, s in 0.01f64..0.99) {
        let p = KernelExponent::constant(pbar);
        let x = Point::new_1d(0.3);
        if s * pbar < 1.0 {
            let c = critical_exponent(&p, s, 1, &x).unwrap();
            prop_assert!(c > pbar);
        } else {
            prop_assert!(critical_exponent(&p, s, 1, &x).is_err());
        }
    }

    #[test]
    fn odd_power_is_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0, p in 1.001f64..4.0) {
        prop_assert!((odd_power(a, p) - odd_power(b, p)) * (a - b) >= -1e-12);
    }

    #[test]
    fn pair_count_matches_formula(res in 4usize..12, collar in 1usize..4) {
        let d = Domain::new(AxisBox::interval(0.0, 1.0), collar as f64 / res as f64).unwrap();
        let mesh = Mesh::build(&d, res, usize::MAX).unwrap();
        let n = mesh.n_cells();
        let c = mesh.n_collar();
        prop_assert_eq!(mesh.pairs().count(), n * (n + 1) / 2 - c * (c + 1) / 2);
        // and no collar-collar pair is ever yielded
        prop_assert!(mesh.pairs().all(|p| mesh.is_interior(p.i) || mesh.is_interior(p.j)));
    }
}

/// Absolute homogeneity and triangle inequality of the Luxemburg-type norms
/// on 100 random pairs.
#[test]
fn norm_axioms_on_random_pairs() {
    let prob = Problem::preset_1d(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    for k in 0..100 {
        let u = GridFunction::from_values(
            (0..prob.mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let v = GridFunction::from_values(
            (0..prob.mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let c: f64 = rng.gen_range(0.1..10.0);

        let nu = equivalent_norm(&u, &prob).unwrap();
        let nv = equivalent_norm(&v, &prob).unwrap();
        let ncu = equivalent_norm(&u.scaled(c), &prob).unwrap();
        assert!((ncu - c * nu).abs() <= 1e-9 * (c * nu).max(1.0), "case {k}: homogeneity");

        let mut sum = u.clone();
        sum.axpy(1.0, &v);
        let nsum = equivalent_norm(&sum, &prob).unwrap();
        assert!(nsum <= nu + nv + 1e-9 * (nu + nv).max(1.0), "case {k}: triangle");

        // the X-norm (a sum of Luxemburg norms) inherits both
        let xu = x_norm(&u, &prob).unwrap().total;
        let xcu = x_norm(&u.scaled(c), &prob).unwrap().total;
        assert!((xcu - c * xu).abs() <= 1e-9 * (c * xu).max(1.0), "case {k}: X homogeneity");
    }
}

/// λ* homogeneity: (λ, V) and (λ/c, cV) define the same energy; with the
/// binary-exact c = 2 the minimizers coincide.
#[test]
fn lambda_potential_rescaling_equivalence() {
    let spec1 = ProblemSpec::preset_1d(24);
    let mut spec2 = spec1.clone();
    spec2.coefficients.v = FieldConfig::constant(2.0);
    let p1 = Problem::resolve(spec1).unwrap();
    let p2 = Problem::resolve(spec2).unwrap();

    let lambda = 0.1;
    let r1 = ExistenceRegime::from_constants(1.5, 2.0, 1.0, 1.0, 0.5, Some(lambda));
    let r2 = ExistenceRegime::from_constants(1.5, 2.0, 1.0, 2.0, 0.5, Some(lambda / 2.0));
    // doubling ‖V‖ halves λ*
    assert!((r2.lambda_star - 0.5 * r1.lambda_star).abs() <= 1e-15);

    let tol = Tolerances { tol_grad: 1e-8, max_iters: 4000 };
    let a = minimize(&p1, &r1, &tol, None).unwrap();
    let b = minimize(&p2, &r2, &tol, None).unwrap();
    assert!(a.converged && b.converged);
    let sup = a.u.sup_dist(&b.u);
    assert!(sup <= 1e-8, "minimizers differ by {sup}");
    assert!((a.energy - b.energy).abs() <= 1e-12 * a.energy.abs().max(1e-12));
}

/// The sampled embedding constant is stable across resolutions.
#[test]
fn embedding_estimate_stable_across_resolutions() {
    let p32 = Problem::preset_1d(32).unwrap();
    let p64 = Problem::preset_1d(64).unwrap();
    let a = estimate_embedding_constant(&p32, 6, 7).unwrap().raw_max;
    let b = estimate_embedding_constant(&p64, 6, 7).unwrap().raw_max;
    let rel = (a - b).abs() / b;
    assert!(rel <= 0.10, "estimates {a} vs {b} differ by {rel:.3}");
}
