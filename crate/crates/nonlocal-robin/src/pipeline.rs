//! Pipeline orchestration: validate → check → solve, structured
//! diagnostics, and file outputs.
//!
//! Every numeric entry in the diagnostics carries a pass/fail/reported
//! verdict; the report deserializes back into the same schema, which the
//! test suite uses as the schema check. The `runtime` block (wall time,
//! version) is the only part excluded from determinism comparisons.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::Problem;
use crate::exponents::{validate_problem, ValidationReport};
use crate::geometry::Point;
use crate::mesh::{interpolate, GridFunction};
use crate::modular::{equivalent_norm, x_modular, NormBreakdown};
use crate::operators::{
    divergence_check, green_check, interior_antisymmetry_check, scalar_monotonicity_check,
    IdentityResidual,
};
use crate::solver::{
    boundary_identity_check, coercivity_check, estimate_embedding_constant, existence_regime,
    minimize, mountain_geometry_check, plateau_bump, EmbeddingEstimate, ExistenceRegime,
    MountainReport, SolveResult, Tolerances,
};
use crate::{Error, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    Check,
    Solve,
}

/// One named scalar check with its verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub verdict: Verdict,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub detail: String,
}

impl CheckRow {
    fn new(name: &str, verdict: Verdict, value: f64, bound: Option<f64>, detail: String) -> Self {
        CheckRow { name: name.into(), verdict, value, bound, detail }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub verdict: Verdict,
    pub residual: IdentityResidual,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
    pub identities: Vec<IdentityCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub embedding: EmbeddingEstimate,
    pub regime: ExistenceRegime,
    pub mountain: MountainReport,
    pub result: SolveResult,
    pub solution_norm: NormBreakdown,
    pub rows: Vec<CheckRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RuntimeMeta {
    pub version: String,
    pub elapsed_seconds: f64,
}

/// Structured record of one pipeline run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub stages: Vec<Stage>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    pub failures: usize,
    pub runtime: RuntimeMeta,
}

impl DiagnosticsReport {
    pub fn ok(&self) -> bool {
        self.failures == 0
    }

    fn count_failures(&mut self) {
        let mut n = 0;
        if let Some(h) = &self.hypotheses {
            n += h.checks.iter().filter(|c| c.verdict == Verdict::Fail).count();
        }
        if let Some(c) = &self.checks {
            n += c.rows.iter().filter(|r| r.verdict == Verdict::Fail).count();
            n += c.identities.iter().filter(|r| r.verdict == Verdict::Fail).count();
        }
        if let Some(s) = &self.solve {
            n += s.rows.iter().filter(|r| r.verdict == Verdict::Fail).count();
        }
        self.failures = n;
    }
}

/// Output files of a solve run.
#[derive(Clone, Debug, Default)]
pub struct OutputFiles {
    pub diagnostics: Option<PathBuf>,
    pub solution: Option<PathBuf>,
    pub energy_trace: Option<PathBuf>,
    pub sphere_samples: Option<PathBuf>,
}

fn verdict_of(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn random_grid(prob: &Problem, rng: &mut ChaCha8Rng, amp: f64) -> GridFunction {
    GridFunction::from_values(
        (0..prob.mesh.n_cells()).map(|_| rng.gen_range(-amp..amp)).collect(),
    )
}

/// Condensed modular invariant suite on the problem's own exponents.
fn modular_suite(prob: &Problem, rows: &mut Vec<CheckRow>) -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(prob.spec.seed ^ 0x0dd_ba11);
    let (pm, pp) = (prob.p.p_minus(), prob.p.p_plus());
    let mut unit_ball_worst = 0.0f64;
    let mut power_margin = 0.0f64;
    let mut bound_reported = 0usize;
    let mut bound_hard = 0usize;
    let mut homog_worst = 0.0f64;
    let mut triangle_worst = 0.0f64;

    for k in 0..40 {
        let u = random_grid(prob, &mut rng, 1.0);
        // interior Lebesgue norm against its own modular
        let norm = luxemburg_interior(prob, &u)?;
        if norm > 0.0 {
            let at_unit = prob.interior_pbar_modular_scaled(&u, norm);
            unit_ball_worst = unit_ball_worst.max((at_unit - 1.0).abs());
        }
        // branch ‖u‖ > 1 and branch ‖u‖ < 1 by rescaling
        for target in [1.7, 0.45] {
            if norm == 0.0 {
                continue;
            }
            let w = u.scaled(target / norm);
            let nw = luxemburg_interior(prob, &w)?;
            let rho = prob.interior_pbar_modular_scaled(&w, 1.0);
            let (lo, hi) = if nw > 1.0 {
                (nw.powf(pm), nw.powf(pp))
            } else {
                (nw.powf(pp), nw.powf(pm))
            };
            let tol = 1e-8 * rho.max(1.0);
            power_margin = power_margin.max((lo - rho).max(rho - hi).max(0.0) / rho.max(1.0));
            let _ = tol;
        }

        // power bounds between the modular and the norm it defines
        let nx = equivalent_norm(&u, prob)?;
        if nx == 0.0 {
            continue;
        }
        for target in [0.6, 1.8] {
            let w = u.scaled(target / nx);
            let nw = equivalent_norm(&w, prob)?;
            let rho = x_modular(&w, prob);
            let tol = 1e-8 * rho.max(1.0);
            if nw < 1.0 {
                let lower = nw.powf(pp) / 4.0f64.powf(pp - 1.0);
                let upper = 4.0 * nw.powf(pm);
                let viol = (lower - rho).max(rho - upper);
                if viol > 2.0 * tol {
                    bound_hard += 1;
                } else if viol > tol {
                    bound_reported += 1;
                }
            } else if nw > 1.0 {
                let viol = nw.powf(pm) - rho;
                if viol > 2.0 * tol {
                    bound_hard += 1;
                } else if viol > tol {
                    bound_reported += 1;
                }
            }
        }

        // homogeneity and triangle inequality of the equivalent norm
        if k < 10 {
            let v = random_grid(prob, &mut rng, 1.0);
            let nu = equivalent_norm(&u, prob)?;
            let nv = equivalent_norm(&v, prob)?;
            let c = 2.7;
            let ncu = equivalent_norm(&u.scaled(c), prob)?;
            homog_worst = homog_worst.max((ncu - c * nu).abs() / (c * nu).max(1e-12));
            let mut sum = u.clone();
            sum.axpy(1.0, &v);
            let nsum = equivalent_norm(&sum, prob)?;
            triangle_worst = triangle_worst.max((nsum - nu - nv).max(0.0) / (nu + nv).max(1e-12));
        }
    }

    rows.push(CheckRow::new(
        "modular: unit-ball identity rho(u/norm) = 1",
        verdict_of(unit_ball_worst <= 1e-8),
        unit_ball_worst,
        Some(1e-8),
        "worst |rho(u/‖u‖) − 1| over 40 random functions".into(),
    ));
    rows.push(CheckRow::new(
        "modular: norm-modular comparison branches",
        verdict_of(power_margin <= 1e-8),
        power_margin,
        Some(1e-8),
        "worst relative violation of the power bounds, both branches".into(),
    ));
    rows.push(CheckRow::new(
        "modular: X-norm power bounds",
        if bound_hard == 0 {
            if bound_reported == 0 {
                Verdict::Pass
            } else {
                Verdict::Reported
            }
        } else {
            Verdict::Fail
        },
        bound_hard as f64,
        Some(0.0),
        format!(
            "hard violations {bound_hard}, reported-within-2x {bound_reported} (discrete seminorm under-resolves the continuum)"
        ),
    ));
    rows.push(CheckRow::new(
        "modular: absolute homogeneity",
        verdict_of(homog_worst <= 1e-9),
        homog_worst,
        Some(1e-9),
        "worst relative homogeneity defect of the equivalent norm".into(),
    ));
    rows.push(CheckRow::new(
        "modular: triangle inequality",
        verdict_of(triangle_worst <= 1e-9),
        triangle_worst,
        Some(1e-9),
        "worst relative triangle excess of the equivalent norm".into(),
    ));

    // norm/modular convergence equivalence on u_n = u + w/n
    {
        let u = random_grid(prob, &mut rng, 1.0);
        let w = random_grid(prob, &mut rng, 1.0);
        let mut first = None;
        let mut prev_norm = f64::INFINITY;
        let mut prev_mod = f64::INFINITY;
        let mut monotone = true;
        for n in 1..=12 {
            let mut un = u.clone();
            un.axpy(1.0 / n as f64, &w);
            let mut diff = un.clone();
            diff.axpy(-1.0, &u);
            let nn = equivalent_norm(&diff, prob)?;
            let mm = x_modular(&diff, prob);
            if nn > prev_norm * (1.0 + 1e-12) || mm > prev_mod * (1.0 + 1e-12) {
                monotone = false;
            }
            if first.is_none() {
                first = Some((nn, mm));
            }
            prev_norm = nn;
            prev_mod = mm;
        }
        let (n1, m1) = first.unwrap_or((0.0, 0.0));
        let decayed = prev_norm <= n1 / 10.0 && prev_mod <= m1 / 10.0;
        rows.push(CheckRow::new(
            "modular: norm and modular decay together",
            verdict_of(monotone && decayed),
            prev_norm,
            Some(n1 / 10.0),
            "u_n = u + w/n: both distances decrease monotonically toward 0".into(),
        ));
    }
    Ok(())
}

fn luxemburg_interior(prob: &Problem, u: &GridFunction) -> Result<f64, Error> {
    crate::modular::luxemburg(|tau| prob.interior_pbar_modular_scaled(u, tau))
}

fn check_stage(prob: &Problem, report: &mut DiagnosticsReport) -> Result<(), Error> {
    let mut rows = Vec::new();
    let mut identities = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(prob.spec.seed ^ 0xc4ec_57a6);

    modular_suite(prob, &mut rows)?;

    // identity checks on smooth data, one refinement step
    let lo = (prob.spec.resolution / 2).max(8);
    let resolutions = [lo, prob.spec.resolution.max(2 * lo)];
    let bump = bump_for(prob);
    let div = divergence_check(&bump, prob, &resolutions)?;
    identities.push(IdentityCheck {
        name: "divergence theorem".into(),
        verdict: identity_verdict(&div),
        residual: div,
    });
    let cosine = |x: &Point| (std::f64::consts::PI * x.coord(0)).cos() * (-x.coord(0) * x.coord(0)).exp();
    let green = green_check(&bump, &cosine, prob, &resolutions)?;
    identities.push(IdentityCheck {
        name: "green identity".into(),
        verdict: identity_verdict(&green),
        residual: green,
    });

    // antisymmetry of the interior double sum
    {
        let u = random_grid(prob, &mut rng, 1.0);
        let (sum, abs_sum) = interior_antisymmetry_check(&u, prob);
        let rel = sum.abs() / abs_sum.max(1e-300);
        rows.push(CheckRow::new(
            "operators: interior antisymmetry",
            verdict_of(rel <= 1e-10),
            rel,
            Some(1e-10),
            "signed interior double sum relative to its absolute mass".into(),
        ));
    }

    // scalar monotonicity and the soft constant-bearing form
    {
        let rep = scalar_monotonicity_check(20_000, prob.spec.seed);
        rows.push(CheckRow::new(
            "operators: scalar monotonicity",
            verdict_of(rep.pass),
            rep.monotonicity_failures as f64,
            Some(0.0),
            format!(
                "{} samples; constant-bearing soft failures: {}",
                rep.samples, rep.constant_form_failures
            ),
        ));
    }

    // monotonicity of the form
    {
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let u = random_grid(prob, &mut rng, 1.0);
            let v = random_grid(prob, &mut rng, 1.0);
            let mut d = u.clone();
            d.axpy(-1.0, &v);
            let m = crate::operators::bilinear_form(&u, &d, prob)
                - crate::operators::bilinear_form(&v, &d, prob);
            worst = worst.min(m);
        }
        rows.push(CheckRow::new(
            "operators: form monotonicity",
            verdict_of(worst >= -1e-10),
            worst,
            Some(-1e-10),
            "min over random pairs of A(u,u−v) − A(v,u−v)".into(),
        ));
    }

    // coercivity of the modular derivative
    {
        let rep = coercivity_check(prob, &[2.0, 4.0, 8.0], prob.spec.seed)?;
        rows.push(CheckRow::new(
            "solver: coercivity ratios",
            verdict_of(rep.monotone && rep.bound_ok && rep.pairing_dominates_modular),
            rep.rows.last().map(|r| r.ratio).unwrap_or(f64::NAN),
            rep.rows.last().map(|r| r.lower_bound),
            "ratios nondecreasing over scales {2,4,8} and above the power bound".into(),
        ));
    }

    // collar truncation sensitivity: modular change when R doubles
    {
        let phi = interpolate(plateau_bump(prob), &prob.mesh)?;
        let rho_r = x_modular(&phi, prob);
        let mut spec2 = prob.spec.clone();
        spec2.domain.collar_radius = Some(prob.domain.collar_radius * 2.0);
        let prob2 = Problem::resolve(spec2)?;
        let phi2 = interpolate(plateau_bump(&prob2), &prob2.mesh)?;
        let rho_2r = x_modular(&phi2, &prob2);
        let rel = (rho_2r - rho_r).abs() / rho_r.max(1e-300);
        rows.push(CheckRow::new(
            "discretization: collar tail sensitivity",
            Verdict::Reported,
            rel,
            None,
            format!(
                "x_modular of the reference bump changes by this relative amount when R doubles ({} to {})",
                prob.domain.collar_radius,
                2.0 * prob.domain.collar_radius
            ),
        ));
    }

    report.checks = Some(CheckReport { rows, identities });
    Ok(())
}

fn identity_verdict(r: &IdentityResidual) -> Verdict {
    if r.rel_residual <= 5e-2 && r.converged {
        Verdict::Pass
    } else if r.rel_residual > 0.25 {
        Verdict::Fail
    } else {
        Verdict::Reported
    }
}

fn bump_for(prob: &Problem) -> impl Fn(&Point) -> f64 + '_ {
    let b = prob.domain.interior;
    move |x: &Point| {
        let mut v = 1.0;
        for a in 0..b.dim() {
            let c = 0.5 * (b.lo(a) + b.hi(a));
            let half = 0.35 * (b.hi(a) - b.lo(a));
            let t = (x.coord(a) - c) / half;
            v *= if t.abs() < 1.0 { (1.0 - 1.0 / (1.0 - t * t)).exp() } else { 0.0 };
        }
        v
    }
}

fn solve_stage(
    prob: &Problem,
    report: &mut DiagnosticsReport,
    out: &mut OutputFiles,
    out_dir: Option<&Path>,
) -> Result<(), Error> {
    let embedding = estimate_embedding_constant(prob, prob.spec.solver.restarts, prob.spec.seed)?;
    let regime = existence_regime(prob, embedding.alpha)?;
    let (mountain, phi) =
        mountain_geometry_check(prob, &regime, prob.spec.solver.sphere_samples, prob.spec.seed)?;
    let tol = Tolerances { tol_grad: prob.spec.solver.tol_grad, max_iters: prob.spec.solver.max_iters };
    let start = phi.scaled(mountain.best_t);
    let result = minimize(prob, &regime, &tol, Some(start))?;
    let boundary = boundary_identity_check(&result.u, prob);
    let solution_norm = result.x_norm;

    let mut rows = Vec::new();
    rows.push(CheckRow::new(
        "solve: lambda below lambda_star",
        if regime.lambda_warning { Verdict::Reported } else { Verdict::Pass },
        regime.lambda,
        Some(regime.lambda_star),
        "existence guaranteed only for lambda in (0, lambda_star); lambda_star is heuristic (sampled alpha)".into(),
    ));
    rows.push(CheckRow::new(
        "solve: descent converged",
        verdict_of(result.converged),
        result.gradient_norm,
        Some(tol.tol_grad),
        format!("{} iterations", result.iterations),
    ));
    rows.push(CheckRow::new(
        "solve: final iterate strictly interior",
        verdict_of(result.strictly_interior),
        solution_norm.total,
        Some(regime.rho),
        "projection safeguard must not bind at convergence".into(),
    ));
    rows.push(CheckRow::new(
        "solve: nontrivial solution",
        if regime.lambda > 0.0 {
            verdict_of(solution_norm.total > 1e-3)
        } else {
            Verdict::Reported
        },
        solution_norm.total,
        Some(1e-3),
        "X-norm of the minimizer".into(),
    ));
    rows.push(CheckRow::new(
        "solve: negative energy",
        if regime.lambda > 0.0 { verdict_of(result.energy < 0.0) } else { Verdict::Reported },
        result.energy,
        Some(0.0),
        "I(u_lambda) = m < 0 for lambda in (0, lambda_star)".into(),
    ));
    // thresholds scale with the requested gradient tolerance; at the
    // default 1e−8 they are exactly 1e−6 and 1e−5
    let weak_bound = 1e-6 * (tol.tol_grad / 1e-8);
    let boundary_bound = 1e-5 * (tol.tol_grad / 1e-8);
    rows.push(CheckRow::new(
        "solve: weak residual",
        verdict_of(result.weak_residual <= weak_bound),
        result.weak_residual,
        Some(weak_bound),
        "max over 50 random directions of |A(u,v) − lambda∫V|u|^{q−2}u v| / (1+‖v‖_X)".into(),
    ));
    rows.push(CheckRow::new(
        "solve: boundary identity",
        verdict_of(boundary.sup <= boundary_bound),
        boundary.sup,
        Some(boundary_bound),
        "sup over eligible collar nodes of |N u + beta|u|^{p̄−2}u − g|".into(),
    ));
    rows.push(CheckRow::new(
        "solve: energy trace monotone",
        verdict_of(result.energy_trace.windows(2).all(|w| w[1] <= w[0] + 1e-15)),
        result.energy_trace.last().copied().unwrap_or(f64::NAN),
        None,
        "nonincreasing after each accepted step".into(),
    ));

    if let Some(dir) = out_dir {
        let sol_path = dir.join("solution.csv");
        let mut f = std::fs::File::create(&sol_path)?;
        result.u.write_csv(&prob.mesh, &mut f)?;
        out.solution = Some(sol_path);

        let tr_path = dir.join("energy_trace.csv");
        let mut f = std::fs::File::create(&tr_path)?;
        writeln!(f, "iteration,energy")?;
        for (i, e) in result.energy_trace.iter().enumerate() {
            writeln!(f, "{i},{e}")?;
        }
        out.energy_trace = Some(tr_path);

        let sp_path = dir.join("sphere_samples.csv");
        let mut f = std::fs::File::create(&sp_path)?;
        writeln!(f, "sample,x_norm,energy")?;
        for (i, s) in mountain.sphere.iter().enumerate() {
            writeln!(f, "{i},{},{}", s.x_norm, s.energy)?;
        }
        out.sphere_samples = Some(sp_path);
    }

    report.solve = Some(SolveReport { embedding, regime, mountain, result, solution_norm, rows });
    Ok(())
}

/// Run the requested stages in order (validate is auto-inserted when check
/// or solve need it), producing the diagnostics report and output files.
pub fn run_pipeline(
    spec: crate::config::ProblemSpec,
    stages: &[Stage],
    out_dir: Option<&Path>,
) -> Result<(DiagnosticsReport, OutputFiles), Error> {
    if stages.is_empty() {
        return Err(Error::InvalidSpec("no stages requested".into()));
    }
    let started = Instant::now();
    let mut report = DiagnosticsReport {
        stages: Vec::new(),
        notes: Vec::new(),
        hypotheses: None,
        checks: None,
        solve: None,
        failures: 0,
        runtime: RuntimeMeta { version: env!("CARGO_PKG_VERSION").into(), elapsed_seconds: 0.0 },
    };
    let want = |s: Stage| stages.contains(&s);
    let mut plan = Vec::new();
    if want(Stage::Validate) {
        plan.push(Stage::Validate);
    } else if want(Stage::Check) || want(Stage::Solve) {
        plan.push(Stage::Validate);
        report.notes.push("validate stage auto-inserted as a dependency".into());
    }
    if want(Stage::Check) {
        plan.push(Stage::Check);
    }
    if want(Stage::Solve) {
        plan.push(Stage::Solve);
    }
    report.stages = plan.clone();

    let prob = Problem::resolve(spec)?;
    let mut out = OutputFiles::default();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut hypotheses_ok = true;
    for stage in plan {
        match stage {
            Stage::Validate => {
                let rep = validate_problem(&prob);
                hypotheses_ok = rep.all_pass();
                report.hypotheses = Some(rep);
            }
            Stage::Check => {
                if !hypotheses_ok {
                    report.notes.push(
                        "check stage ran under failed hypotheses; results are advisory".into(),
                    );
                }
                if let Err(e) = check_stage(&prob, &mut report) {
                    report.notes.push(format!("check stage aborted: {e}"));
                }
            }
            Stage::Solve => {
                if let Err(e) = solve_stage(&prob, &mut report, &mut out, out_dir) {
                    report.notes.push(format!("solve stage aborted: {e}"));
                }
            }
        }
    }

    report.runtime.elapsed_seconds = started.elapsed().as_secs_f64();
    report.count_failures();

    if let Some(dir) = out_dir {
        let path = dir.join("diagnostics.json");
        std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap())?;
        out.diagnostics = Some(path);
    }
    Ok((report, out))
}

/// Report with the runtime block stripped, serialized canonically; two
/// deterministic runs must agree byte for byte on this view.
pub fn canonical_json(report_json: &str) -> Result<String, Error> {
    let mut v: serde_json::Value =
        serde_json::from_str(report_json).map_err(|e| Error::Schema(e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("runtime");
    }
    Ok(serde_json::to_string_pretty(&v).unwrap())
}
