//! Variable-exponent and coefficient fields, and the hypothesis checks
//! that gate every computation.
//!
//! Fields come from a small preset family (constant, affine, sinusoidal,
//! separable-sum) so configurations stay bit-reproducible and symmetry can
//! be guaranteed by construction. Declared bounds are verified by dense
//! sampling rather than global optimization; the presets make tight bounds
//! available analytically, sampling guards against typos. Custom function
//! pointers are allowed for diagnostics and tests (e.g. deliberately
//! asymmetric kernels), never from configuration files.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Problem;
use crate::geometry::{AxisBox, Point};
use crate::{Error, Verdict};

/// Where a scalar field lives (and which cells an integral ranges over).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interior,
    Collar,
    Both,
}

/// Closed-form scalar expression on points.
#[derive(Clone, Copy, Debug)]
pub enum ScalarExpr {
    Constant { value: f64 },
    /// offset + slope · x
    Affine { offset: f64, slope: [f64; 2] },
    /// offset + amplitude · sin(frequency · (x_1 + … + x_N) + phase)
    Sinusoidal { offset: f64, amplitude: f64, frequency: f64, phase: f64 },
    Custom { f: fn(&Point) -> f64, label: &'static str },
}

impl ScalarExpr {
    pub fn eval(&self, x: &Point) -> f64 {
        match *self {
            ScalarExpr::Constant { value } => value,
            ScalarExpr::Affine { offset, slope } => {
                let mut v = offset;
                for a in 0..x.dim() {
                    v += slope[a] * x.coord(a);
                }
                v
            }
            ScalarExpr::Sinusoidal { offset, amplitude, frequency, phase } => {
                offset + amplitude * (frequency * x.coord_sum() + phase).sin()
            }
            ScalarExpr::Custom { f, .. } => f(x),
        }
    }

    /// Analytic bounds over a box; exact for constant/affine, the safe
    /// envelope offset ± |amplitude| for sinusoidal. None for custom.
    pub fn bounds_on(&self, b: &AxisBox) -> Option<(f64, f64)> {
        match *self {
            ScalarExpr::Constant { value } => Some((value, value)),
            ScalarExpr::Affine { offset, slope } => {
                let mut lo = offset;
                let mut hi = offset;
                for a in 0..b.dim() {
                    let (s0, s1) = (slope[a] * b.lo(a), slope[a] * b.hi(a));
                    lo += s0.min(s1);
                    hi += s0.max(s1);
                }
                Some((lo, hi))
            }
            ScalarExpr::Sinusoidal { offset, amplitude, .. } => {
                Some((offset - amplitude.abs(), offset + amplitude.abs()))
            }
            ScalarExpr::Custom { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            ScalarExpr::Constant { value } => format!("constant {value}"),
            ScalarExpr::Affine { offset, slope } => format!("affine {offset} + {slope:?}·x"),
            ScalarExpr::Sinusoidal { offset, amplitude, frequency, phase } => {
                format!("{offset} + {amplitude}·sin({frequency}·Σx + {phase})")
            }
            ScalarExpr::Custom { label, .. } => format!("custom({label})"),
        }
    }
}

/// A spatial coefficient or exponent on Ω, the collar, or both:
/// q, r, p̄-like roles, V, β, g.
#[derive(Clone, Copy, Debug)]
pub struct ScalarField {
    pub expr: ScalarExpr,
    pub region: Region,
    pub declared_bounds: Option<(f64, f64)>,
}

impl ScalarField {
    pub fn new(expr: ScalarExpr, region: Region) -> Self {
        ScalarField { expr, region, declared_bounds: None }
    }

    pub fn constant(value: f64, region: Region) -> Self {
        ScalarField {
            expr: ScalarExpr::Constant { value },
            region,
            declared_bounds: Some((value, value)),
        }
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.declared_bounds = Some((lo, hi));
        self
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.expr.eval(x)
    }
}

/// Symmetric two-point exponent expression p(x, y).
///
/// Every preset is symmetric under (x, y) ↔ (y, x) by construction; the
/// custom variant exists so tests can feed deliberately broken kernels to
/// the validator.
#[derive(Clone, Copy, Debug)]
pub enum KernelExpr {
    Constant { value: f64 },
    /// offset + slope · (x + y)
    Affine { offset: f64, slope: [f64; 2] },
    /// offset + amplitude · sin(frequency · (Σx + Σy) + phase)
    Sinusoidal { offset: f64, amplitude: f64, frequency: f64, phase: f64 },
    /// base(x) + base(y)
    SeparableSum { base: ScalarExpr },
    Custom { f: fn(&Point, &Point) -> f64, label: &'static str },
}

impl KernelExpr {
    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        match *self {
            KernelExpr::Constant { value } => value,
            KernelExpr::Affine { offset, slope } => {
                let mut v = offset;
                for a in 0..x.dim() {
                    v += slope[a] * (x.coord(a) + y.coord(a));
                }
                v
            }
            KernelExpr::Sinusoidal { offset, amplitude, frequency, phase } => {
                offset + amplitude * (frequency * (x.coord_sum() + y.coord_sum()) + phase).sin()
            }
            KernelExpr::SeparableSum { base } => base.eval(x) + base.eval(y),
            KernelExpr::Custom { f, .. } => f(x, y),
        }
    }

    fn bounds_on(&self, b: &AxisBox) -> Option<(f64, f64)> {
        match *self {
            KernelExpr::Constant { value } => Some((value, value)),
            KernelExpr::Affine { offset, slope } => {
                let half = ScalarExpr::Affine { offset: 0.0, slope };
                let (lo, hi) = half.bounds_on(b)?;
                Some((offset + 2.0 * lo, offset + 2.0 * hi))
            }
            KernelExpr::Sinusoidal { offset, amplitude, .. } => {
                Some((offset - amplitude.abs(), offset + amplitude.abs()))
            }
            KernelExpr::SeparableSum { base } => {
                let (lo, hi) = base.bounds_on(b)?;
                Some((2.0 * lo, 2.0 * hi))
            }
            KernelExpr::Custom { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            KernelExpr::Constant { value } => format!("constant {value}"),
            KernelExpr::Affine { offset, slope } => format!("affine {offset} + {slope:?}·(x+y)"),
            KernelExpr::Sinusoidal { offset, amplitude, frequency, phase } => {
                format!("{offset} + {amplitude}·sin({frequency}·(Σx+Σy) + {phase})")
            }
            KernelExpr::SeparableSum { base } => format!("separable sum of [{}]", base.describe()),
            KernelExpr::Custom { label, .. } => format!("custom({label})"),
        }
    }
}

/// The kernel exponent p(x, y) with its declared bounds p⁻ ≤ p ≤ p⁺.
#[derive(Clone, Copy, Debug)]
pub struct KernelExponent {
    pub expr: KernelExpr,
    p_minus: f64,
    p_plus: f64,
}

impl KernelExponent {
    pub fn constant(value: f64) -> Self {
        KernelExponent { expr: KernelExpr::Constant { value }, p_minus: value, p_plus: value }
    }

    /// Build with analytic bounds over `domain` (the sampling box for each
    /// of the two arguments). Errors for custom expressions, which must
    /// declare bounds explicitly.
    pub fn from_expr(expr: KernelExpr, domain: &AxisBox) -> Result<Self, Error> {
        let (lo, hi) = expr.bounds_on(domain).ok_or_else(|| {
            Error::InvalidSpec("custom kernel exponents must declare bounds".into())
        })?;
        Ok(KernelExponent { expr, p_minus: lo, p_plus: hi })
    }

    pub fn with_bounds(expr: KernelExpr, p_minus: f64, p_plus: f64) -> Self {
        KernelExponent { expr, p_minus, p_plus }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        self.expr.eval(x, y)
    }

    /// p̄(x) = p(x, x), the diagonal trace of the kernel exponent.
    pub fn diagonal(&self, x: &Point) -> f64 {
        self.expr.eval(x, x)
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }
}

/// Conjugate exponent r/(r−1), so that 1/r + 1/r' = 1.
pub fn conjugate_exponent(r: f64) -> Result<f64, Error> {
    if !(r > 1.0) {
        return Err(Error::DegenerateExponent(format!(
            "conjugate exponent needs r > 1, got {r}"
        )));
    }
    Ok(r / (r - 1.0))
}

/// Critical Sobolev exponent N·p̄(x) / (N − s·p̄(x)).
pub fn critical_exponent(p: &KernelExponent, s: f64, dim: usize, x: &Point) -> Result<f64, Error> {
    let pb = p.diagonal(x);
    let n = dim as f64;
    if s * pb >= n {
        return Err(Error::DegenerateExponent(format!(
            "s·p̄(x) = {} ≥ N = {n} at {:?}",
            s * pb,
            x.coords()
        )));
    }
    Ok(n * pb / (n - s * pb))
}

/// Failure evidence: the sample point (pair) and offending value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub location: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paired: Option<Vec<f64>>,
    pub value: f64,
}

/// One hypothesis line of the validation report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl HypothesisCheck {
    fn pass(name: &str, detail: String) -> Self {
        HypothesisCheck { name: name.into(), verdict: Verdict::Pass, detail, witness: None }
    }

    fn fail(name: &str, detail: String, witness: Witness) -> Self {
        HypothesisCheck {
            name: name.into(),
            verdict: Verdict::Fail,
            detail,
            witness: Some(witness),
        }
    }
}

/// Structured verdict list for the hypothesis suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> Vec<&HypothesisCheck> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail).collect()
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const SYMMETRY_SAMPLES: usize = 10_000;
const BOUND_SAMPLES: usize = 20_000;
const POINTWISE_SAMPLES: usize = 2_000;
const SYMMETRY_TOL: f64 = 1e-14;

fn sample_in(b: &AxisBox, rng: &mut ChaCha8Rng) -> Point {
    let mut c = [0.0; 2];
    for a in 0..b.dim() {
        c[a] = rng.gen_range(b.lo(a)..b.hi(a));
    }
    Point::from_coords(&c[..b.dim()])
}

fn sample_collar(interior: &AxisBox, outer: &AxisBox, rng: &mut ChaCha8Rng) -> Point {
    // Rejection sampling; the collar has positive measure by construction.
    loop {
        let p = sample_in(outer, rng);
        if !interior.contains_strict(&p) {
            return p;
        }
    }
}

/// Check every standing hypothesis against the resolved problem. Failures
/// are report entries with witnesses, never exceptions.
pub fn validate_problem(prob: &Problem) -> ValidationReport {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(prob.spec.seed ^ 0x5601_9e3d);
    let outer = prob.domain.outer_box();
    let interior = prob.domain.interior;
    let s = prob.s;
    let dim = prob.domain.dim;

    // (S): fractional order in (0,1).
    if s > 0.0 && s < 1.0 {
        checks.push(HypothesisCheck::pass("S: s in (0,1)", format!("s = {s}")));
    } else {
        checks.push(HypothesisCheck::fail(
            "S: s in (0,1)",
            format!("s = {s} outside (0,1)"),
            Witness { location: vec![], paired: None, value: s },
        ));
    }

    // (P): symmetry of the kernel exponent on sampled pairs.
    {
        let mut worst: Option<(Point, Point, f64)> = None;
        for _ in 0..SYMMETRY_SAMPLES {
            let x = sample_in(&outer, &mut rng);
            let y = sample_in(&outer, &mut rng);
            let pxy = prob.p.eval(&x, &y);
            let pyx = prob.p.eval(&y, &x);
            let gap = (pxy - pyx).abs();
            let tol = SYMMETRY_TOL * pxy.abs().max(1.0);
            if gap > tol && worst.map_or(true, |(_, _, g)| gap > g) {
                worst = Some((x, y, gap));
            }
        }
        match worst {
            None => checks.push(HypothesisCheck::pass(
                "P: p(x,y) = p(y,x)",
                format!("{SYMMETRY_SAMPLES} sampled pairs symmetric to {SYMMETRY_TOL:e}"),
            )),
            Some((x, y, gap)) => checks.push(HypothesisCheck::fail(
                "P: p(x,y) = p(y,x)",
                format!("asymmetry {gap:e} exceeds {SYMMETRY_TOL:e}"),
                Witness {
                    location: x.coords().to_vec(),
                    paired: Some(y.coords().to_vec()),
                    value: gap,
                },
            )),
        }
    }

    // (P): declared bounds hold on a dense sample and p⁻ > 1.
    {
        let (pm, pp) = (prob.p.p_minus(), prob.p.p_plus());
        let mut violation: Option<(Point, Point, f64)> = None;
        for _ in 0..BOUND_SAMPLES {
            let x = sample_in(&outer, &mut rng);
            let y = sample_in(&outer, &mut rng);
            let v = prob.p.eval(&x, &y);
            if v < pm - 1e-12 || v > pp + 1e-12 {
                violation = Some((x, y, v));
                break;
            }
        }
        let name = "P: p_minus <= p <= p_plus, p_minus > 1";
        if let Some((x, y, v)) = violation {
            checks.push(HypothesisCheck::fail(
                name,
                format!("p = {v} escapes declared [{pm}, {pp}]"),
                Witness {
                    location: x.coords().to_vec(),
                    paired: Some(y.coords().to_vec()),
                    value: v,
                },
            ));
        } else if pm <= 1.0 {
            checks.push(HypothesisCheck::fail(
                name,
                format!("declared p_minus = {pm} is not > 1"),
                Witness { location: vec![], paired: None, value: pm },
            ));
        } else {
            checks.push(HypothesisCheck::pass(
                name,
                format!("{BOUND_SAMPLES} samples inside [{pm}, {pp}]"),
            ));
        }
    }

    // (P): subcritical scaling s·p⁺ < N.
    {
        let spp = s * prob.p.p_plus();
        let n = dim as f64;
        if spp < n {
            checks.push(HypothesisCheck::pass(
                "P: s*p_plus < N",
                format!("s·p⁺ = {spp} < {n}"),
            ));
        } else {
            checks.push(HypothesisCheck::fail(
                "P: s*p_plus < N",
                format!("s·p⁺ = {spp} >= N = {n}"),
                Witness { location: vec![], paired: None, value: spp },
            ));
        }
    }

    // (β): nonnegative Robin coefficient on the collar.
    {
        let mut witness = None;
        for _ in 0..POINTWISE_SAMPLES {
            let x = sample_collar(&interior, &outer, &mut rng);
            let b = prob.beta.eval(&x);
            if b < -1e-14 {
                witness = Some((x, b));
                break;
            }
        }
        match witness {
            None => checks.push(HypothesisCheck::pass(
                "beta: beta >= 0 on collar",
                format!("{POINTWISE_SAMPLES} collar samples nonnegative"),
            )),
            Some((x, b)) => checks.push(HypothesisCheck::fail(
                "beta: beta >= 0 on collar",
                format!("beta = {b} < 0"),
                Witness { location: x.coords().to_vec(), paired: None, value: b },
            )),
        }
    }

    // Exponent-role fields stay above 1 on Ω.
    for (label, field) in [("q", &prob.q), ("r", &prob.r)] {
        let name = format!("F: {label} > 1 on Omega");
        let mut witness = None;
        for _ in 0..POINTWISE_SAMPLES {
            let x = sample_in(&interior, &mut rng);
            let v = field.eval(&x);
            if v <= 1.0 {
                witness = Some((x, v));
                break;
            }
        }
        match witness {
            None => checks.push(HypothesisCheck::pass(&name, "sampled > 1".into())),
            Some((x, v)) => checks.push(HypothesisCheck::fail(
                &name,
                format!("{label} = {v} <= 1"),
                Witness { location: x.coords().to_vec(), paired: None, value: v },
            )),
        }
    }

    // (F): subhomogeneity q(x) < p̄(x).
    {
        let mut witness = None;
        for _ in 0..POINTWISE_SAMPLES {
            let x = sample_in(&interior, &mut rng);
            let (qv, pb) = (prob.q.eval(&x), prob.p.diagonal(&x));
            if qv >= pb {
                witness = Some((x, qv - pb));
                break;
            }
        }
        match witness {
            None => checks.push(HypothesisCheck::pass(
                "F: q(x) < pbar(x) on Omega",
                "sampled strict".into(),
            )),
            Some((x, gap)) => checks.push(HypothesisCheck::fail(
                "F: q(x) < pbar(x) on Omega",
                format!("q - pbar = {gap} >= 0"),
                Witness { location: x.coords().to_vec(), paired: None, value: gap },
            )),
        }
    }

    // (F): admissible source exponent 1 < r'(x)q(x) < p*_s(x).
    {
        let name = "F: 1 < r'(x)q(x) < p*_s(x) on Omega";
        let mut entry = None;
        for _ in 0..POINTWISE_SAMPLES {
            let x = sample_in(&interior, &mut rng);
            let rv = prob.r.eval(&x);
            let qv = prob.q.eval(&x);
            let rq = match conjugate_exponent(rv) {
                Ok(rc) => rc * qv,
                Err(_) => {
                    entry = Some((x, rv, "r(x) <= 1 so r'(x) undefined".to_string()));
                    break;
                }
            };
            let pstar = match critical_exponent(&prob.p, s, dim, &x) {
                Ok(v) => v,
                Err(_) => {
                    entry = Some((x, s * prob.p.diagonal(&x), "s·p̄(x) >= N".to_string()));
                    break;
                }
            };
            if !(rq > 1.0 && rq < pstar) {
                entry = Some((x, rq, format!("r'q = {rq} not in (1, {pstar})")));
                break;
            }
        }
        match entry {
            None => checks.push(HypothesisCheck::pass(name, "sampled admissible".into())),
            Some((x, v, detail)) => checks.push(HypothesisCheck::fail(
                name,
                detail,
                Witness { location: x.coords().to_vec(), paired: None, value: v },
            )),
        }
    }

    // (F): Ω₀ is a nonempty subregion where V is positive.
    {
        let name = "F: V > 0 on nonempty Omega0";
        if prob.omega0.is_degenerate() {
            checks.push(HypothesisCheck::fail(
                name,
                "Omega0 is degenerate".into(),
                Witness { location: vec![], paired: None, value: prob.omega0.measure() },
            ));
        } else {
            let mut witness = None;
            for _ in 0..POINTWISE_SAMPLES {
                let x = sample_in(&prob.omega0, &mut rng);
                let v = prob.potential.eval(&x);
                if v <= 0.0 {
                    witness = Some((x, v));
                    break;
                }
            }
            match witness {
                None => checks.push(HypothesisCheck::pass(name, "sampled positive".into())),
                Some((x, v)) => checks.push(HypothesisCheck::fail(
                    name,
                    format!("V = {v} <= 0 inside Omega0"),
                    Witness { location: x.coords().to_vec(), paired: None, value: v },
                )),
            }
        }
    }

    // (F) also fixes g ≡ 0; a nonzero g is legal for the function-space
    // machinery, so this is reported rather than failed.
    {
        let mut worst: Option<(Point, f64)> = None;
        for _ in 0..POINTWISE_SAMPLES {
            let x = sample_collar(&interior, &outer, &mut rng);
            let v = prob.g.eval(&x);
            if v.abs() > 1e-14 && worst.map_or(true, |(_, w)| v.abs() > w.abs()) {
                worst = Some((x, v));
            }
        }
        match worst {
            None => checks.push(HypothesisCheck::pass(
                "F: g vanishes on the collar",
                "g == 0 at all samples".into(),
            )),
            Some((x, v)) => checks.push(HypothesisCheck {
                name: "F: g vanishes on the collar".into(),
                verdict: Verdict::Reported,
                detail: format!("g = {v} != 0; the energy stage assumes g == 0"),
                witness: Some(Witness {
                    location: x.coords().to_vec(),
                    paired: None,
                    value: v,
                }),
            }),
        }
    }

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> AxisBox {
        AxisBox::interval(0.0, 1.0)
    }

    #[test]
    fn diagonal_kills_pair_distance() {
        fn p_dist(x: &Point, y: &Point) -> f64 {
            2.0 + x.dist(y)
        }
        let p = KernelExponent::with_bounds(
            KernelExpr::Custom { f: p_dist, label: "2+|x-y|" },
            2.0,
            4.0,
        );
        assert_eq!(p.diagonal(&Point::new_1d(0.3)), 2.0);
    }

    #[test]
    fn diagonal_of_presets() {
        let c = KernelExponent::constant(2.5);
        assert_eq!(c.diagonal(&Point::new_1d(0.77)), 2.5);

        let s = KernelExponent::from_expr(
            KernelExpr::Sinusoidal { offset: 2.0, amplitude: 0.3, frequency: 1.0, phase: 0.0 },
            &unit_box(),
        )
        .unwrap();
        let got = s.diagonal(&Point::new_1d(0.5));
        assert!((got - (2.0 + 0.3 * 1.0f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn conjugate_examples_and_involution() {
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert!((conjugate_exponent(4.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((conjugate_exponent(1.5).unwrap() - 3.0).abs() < 1e-15);
        assert!(conjugate_exponent(1.0).is_err());
        assert!(conjugate_exponent(0.5).is_err());
        for r in [1.01, 1.3, 2.0, 5.0, 40.0] {
            let back = conjugate_exponent(conjugate_exponent(r).unwrap()).unwrap();
            assert!((back - r).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn critical_exponent_arithmetic() {
        let p = KernelExponent::constant(2.0);
        let x = Point::new_1d(0.5);
        let v = critical_exponent(&p, 0.4, 1, &x).unwrap();
        assert!((v - 10.0).abs() < 1e-12);
        let x2 = Point::new_2d(0.5, 0.5);
        let v2 = critical_exponent(&p, 0.5, 2, &x2).unwrap();
        assert!((v2 - 4.0).abs() < 1e-12);
        assert!(critical_exponent(&p, 0.5, 1, &x).is_err());
        // Above the diagonal whenever defined.
        for s in [0.1, 0.25, 0.45] {
            let v = critical_exponent(&p, s, 1, &x).unwrap();
            assert!(v > p.diagonal(&x));
        }
    }

    #[test]
    fn preset_symmetry_holds_densely() {
        let exprs = [
            KernelExpr::Constant { value: 2.0 },
            KernelExpr::Affine { offset: 2.0, slope: [0.25, 0.0] },
            KernelExpr::Sinusoidal { offset: 2.0, amplitude: 0.3, frequency: 1.7, phase: 0.4 },
            KernelExpr::SeparableSum {
                base: ScalarExpr::Affine { offset: 1.0, slope: [0.2, 0.0] },
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b = AxisBox::interval(-1.0, 2.0);
        for expr in exprs {
            for _ in 0..10_000 {
                let x = sample_in(&b, &mut rng);
                let y = sample_in(&b, &mut rng);
                let d = (expr.eval(&x, &y) - expr.eval(&y, &x)).abs();
                assert!(d <= 1e-14, "asymmetry {d} for {}", expr.describe());
            }
        }
    }

    #[test]
    fn affine_bounds_are_tight() {
        let expr = KernelExpr::Affine { offset: 2.0, slope: [0.1, 0.0] };
        let b = AxisBox::interval(0.0, 1.0);
        let k = KernelExponent::from_expr(expr, &b).unwrap();
        assert!((k.p_minus() - 2.0).abs() < 1e-15);
        assert!((k.p_plus() - 2.2).abs() < 1e-15);
    }
}
