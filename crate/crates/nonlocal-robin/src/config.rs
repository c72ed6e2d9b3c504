//! Problem configuration: the JSON schema, defaults, and the resolved
//! runtime bundle every computation consumes.
//!
//! Configs describe exponents and coefficients as preset descriptors
//! (name + parameters), never code. Defaults: resolution 64, collar radius
//! = diam(Ω), Ω₀ = the middle half of Ω, λ = "auto" (λ*/2 at runtime),
//! tol_grad 1e−8, max_iters 5000.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::exponents::{KernelExponent, KernelExpr, Region, ScalarExpr, ScalarField};
use crate::geometry::AxisBox;
use crate::mesh::{CellRegion, Domain, Mesh, PairAssembly, GRID_RULE};
use crate::Error;

fn d_resolution() -> usize {
    64
}

fn d_pair_budget() -> usize {
    4_000_000
}

/// Scalar-field preset descriptor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    Constant { value: f64 },
    Affine {
        offset: f64,
        #[serde(default)]
        slope: Vec<f64>,
    },
    Sinusoidal {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl FieldConfig {
    pub fn constant(value: f64) -> Self {
        FieldConfig::Constant { value }
    }

    fn to_expr(&self, dim: usize) -> Result<ScalarExpr, Error> {
        Ok(match self {
            FieldConfig::Constant { value } => ScalarExpr::Constant { value: *value },
            FieldConfig::Affine { offset, slope } => {
                if slope.len() > dim {
                    return Err(Error::Schema(format!(
                        "affine slope has {} entries for dimension {dim}",
                        slope.len()
                    )));
                }
                let mut s = [0.0; 2];
                for (i, v) in slope.iter().enumerate() {
                    s[i] = *v;
                }
                ScalarExpr::Affine { offset: *offset, slope: s }
            }
            FieldConfig::Sinusoidal { offset, amplitude, frequency, phase } => {
                ScalarExpr::Sinusoidal {
                    offset: *offset,
                    amplitude: *amplitude,
                    frequency: *frequency,
                    phase: *phase,
                }
            }
        })
    }
}

/// Kernel-exponent preset descriptor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Constant { value: f64 },
    Affine {
        offset: f64,
        #[serde(default)]
        slope: Vec<f64>,
    },
    Sinusoidal {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    SeparableSum { base: FieldConfig },
}

impl KernelConfig {
    fn to_expr(&self, dim: usize) -> Result<KernelExpr, Error> {
        Ok(match self {
            KernelConfig::Constant { value } => KernelExpr::Constant { value: *value },
            KernelConfig::Affine { offset, slope } => {
                if slope.len() > dim {
                    return Err(Error::Schema(format!(
                        "affine slope has {} entries for dimension {dim}",
                        slope.len()
                    )));
                }
                let mut s = [0.0; 2];
                for (i, v) in slope.iter().enumerate() {
                    s[i] = *v;
                }
                KernelExpr::Affine { offset: *offset, slope: s }
            }
            KernelConfig::Sinusoidal { offset, amplitude, frequency, phase } => {
                KernelExpr::Sinusoidal {
                    offset: *offset,
                    amplitude: *amplitude,
                    frequency: *frequency,
                    phase: *phase,
                }
            }
            KernelConfig::SeparableSum { base } => {
                KernelExpr::SeparableSum { base: base.to_expr(dim)? }
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Per-axis [lo, hi] of the interior box Ω.
    pub interior: Vec<[f64; 2]>,
    /// Collar radius R; defaults to diam(Ω).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collar_radius: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub p: KernelConfig,
    /// Declared (p⁻, p⁺); computed from the preset when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_bounds: Option<[f64; 2]>,
    pub q: FieldConfig,
    pub r: FieldConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    #[serde(rename = "V")]
    pub v: FieldConfig,
    pub beta: FieldConfig,
    #[serde(default = "zero_field")]
    pub g: FieldConfig,
}

fn zero_field() -> FieldConfig {
    FieldConfig::Constant { value: 0.0 }
}

/// λ: an explicit value or "auto" (= λ*/2 once the regime is known).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum LambdaConfig {
    Value(f64),
    Keyword(String),
}

impl Default for LambdaConfig {
    fn default() -> Self {
        LambdaConfig::Keyword("auto".into())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol_grad: f64,
    pub max_iters: usize,
    /// ρ = rho_fraction · min(1, 1/α).
    pub rho_fraction: f64,
    /// Restarts of the embedding-constant ascent.
    pub restarts: usize,
    pub ascent_iters: usize,
    /// Safety factor applied to the sampled embedding ratio.
    pub alpha_safety: f64,
    pub sphere_samples: usize,
    /// Ray samples t = 2^{-1} … 2^{-ray_levels}.
    pub ray_levels: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_grad: 1e-8,
            max_iters: 5000,
            rho_fraction: 0.5,
            restarts: 6,
            ascent_iters: 30,
            alpha_safety: 2.0,
            sphere_samples: 32,
            ray_levels: 10,
        }
    }
}

/// Full problem description as read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub dim: usize,
    pub s: f64,
    #[serde(default = "default_domain")]
    pub domain: DomainConfig,
    #[serde(default = "d_resolution")]
    pub resolution: usize,
    pub exponents: ExponentsConfig,
    pub coefficients: CoefficientsConfig,
    /// Per-axis [lo, hi] of Ω₀; defaults to the middle half of Ω.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub lambda: LambdaConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default = "d_pair_budget")]
    pub pair_budget: usize,
}

fn default_domain() -> DomainConfig {
    DomainConfig { interior: vec![[0.0, 1.0]], collar_radius: None }
}

impl ProblemSpec {
    /// The reference configuration: Ω = (0,1), R = 1, s = 0.4, p ≡ 2,
    /// q ≡ 1.5, r ≡ 4, V ≡ 1, β ≡ 0, g ≡ 0, Ω₀ = (0.25, 0.75), λ auto.
    pub fn preset_1d(resolution: usize) -> Self {
        ProblemSpec {
            dim: 1,
            s: 0.4,
            domain: DomainConfig { interior: vec![[0.0, 1.0]], collar_radius: Some(1.0) },
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
            omega0: Some(vec![[0.25, 0.75]]),
            lambda: LambdaConfig::default(),
            solver: SolverConfig::default(),
            seed: 7,
            deterministic: true,
            pair_budget: d_pair_budget(),
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }
}

/// Load a configuration file, classifying syntax vs. schema problems.
pub fn load_config(path: &Path) -> Result<ProblemSpec, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ProblemSpec, Error> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Schema(e.to_string()),
        _ => Error::Parse { line: e.line(), column: e.column(), msg: e.to_string() },
    })
}

/// Per-cell coefficient caches evaluated once at the nodes.
#[derive(Clone, Debug, Default)]
pub struct CellCoeffs {
    pub pbar: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    /// r'(x)·q(x), the embedding target exponent.
    pub rq: Vec<f64>,
    pub v: Vec<f64>,
    pub beta: Vec<f64>,
    pub g_abs: Vec<f64>,
    pub g_signed: Vec<f64>,
}

/// Resolved problem: fields, mesh, pair assembly, coefficient caches.
/// Immutable after construction; evaluators are pure, so the bundle is
/// safe to share across worker threads.
pub struct Problem {
    pub spec: ProblemSpec,
    pub domain: Domain,
    pub mesh: Mesh,
    pub p: KernelExponent,
    pub q: ScalarField,
    pub r: ScalarField,
    pub potential: ScalarField,
    pub beta: ScalarField,
    pub g: ScalarField,
    pub omega0: AxisBox,
    pub s: f64,
    pub assembly: PairAssembly,
    pub cell: CellCoeffs,
}

impl Problem {
    pub fn resolve(spec: ProblemSpec) -> Result<Self, Error> {
        if spec.dim != 1 && spec.dim != 2 {
            return Err(Error::InvalidSpec(format!("dim must be 1 or 2, got {}", spec.dim)));
        }
        if spec.domain.interior.len() != spec.dim {
            return Err(Error::InvalidSpec(format!(
                "domain.interior has {} axis ranges for dimension {}",
                spec.domain.interior.len(),
                spec.dim
            )));
        }
        let interior = AxisBox::from_bounds(&spec.domain.interior);
        if interior.is_degenerate() {
            return Err(Error::InvalidSpec("interior box is degenerate".into()));
        }
        let dim = spec.dim;
        let collar = spec.domain.collar_radius.unwrap_or_else(|| {
            (0..dim).map(|a| interior.width(a).powi(2)).sum::<f64>().sqrt()
        });
        let domain = Domain::new(interior, collar)?;
        let outer = domain.outer_box();

        let p_expr = spec.exponents.p.to_expr(dim)?;
        let p = match spec.exponents.p_bounds {
            Some([lo, hi]) => KernelExponent::with_bounds(p_expr, lo, hi),
            None => KernelExponent::from_expr(p_expr, &outer)?,
        };
        let q = ScalarField::new(spec.exponents.q.to_expr(dim)?, Region::Interior);
        let r = ScalarField::new(spec.exponents.r.to_expr(dim)?, Region::Interior);
        let potential = ScalarField::new(spec.coefficients.v.to_expr(dim)?, Region::Interior);
        let beta = ScalarField::new(spec.coefficients.beta.to_expr(dim)?, Region::Collar);
        let g = ScalarField::new(spec.coefficients.g.to_expr(dim)?, Region::Collar);

        let omega0 = match &spec.omega0 {
            Some(b) => {
                if b.len() != dim {
                    return Err(Error::InvalidSpec(format!(
                        "omega0 has {} axis ranges for dimension {dim}",
                        b.len()
                    )));
                }
                AxisBox::from_bounds(b)
            }
            None => {
                // middle half of Ω per axis
                let mut bounds = Vec::with_capacity(dim);
                for a in 0..dim {
                    let w = interior.width(a);
                    bounds.push([interior.lo(a) + 0.25 * w, interior.hi(a) - 0.25 * w]);
                }
                AxisBox::from_bounds(&bounds)
            }
        };

        let mesh = Mesh::build(&domain, spec.resolution, spec.pair_budget)?;
        let assembly = PairAssembly::build(&mesh, &p, spec.s, &GRID_RULE);

        let n = mesh.n_cells();
        let mut cell = CellCoeffs {
            pbar: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
            rq: Vec::with_capacity(n),
            v: Vec::with_capacity(n),
            beta: Vec::with_capacity(n),
            g_abs: Vec::with_capacity(n),
            g_signed: Vec::with_capacity(n),
        };
        for c in &mesh.cells {
            let x = &c.center;
            cell.pbar.push(p.diagonal(x));
            let qv = q.eval(x);
            let rv = r.eval(x);
            cell.q.push(qv);
            cell.r.push(rv);
            cell.rq.push(if rv > 1.0 { rv / (rv - 1.0) * qv } else { f64::NAN });
            cell.v.push(potential.eval(x));
            let (bv, gv) = match c.region {
                CellRegion::Collar => (beta.eval(x), g.eval(x)),
                CellRegion::Interior => (0.0, 0.0),
            };
            cell.beta.push(bv);
            cell.g_abs.push(gv.abs());
            cell.g_signed.push(gv);
        }

        Ok(Problem {
            s: spec.s,
            spec,
            domain,
            mesh,
            p,
            q,
            r,
            potential,
            beta,
            g,
            omega0,
            assembly,
            cell,
        })
    }

    /// Reference 1-d problem at the given resolution.
    pub fn preset_1d(resolution: usize) -> Result<Self, Error> {
        Problem::resolve(ProblemSpec::preset_1d(resolution))
    }

    /// Rebuild at another resolution (refinement sweeps).
    pub fn with_resolution(&self, resolution: usize) -> Result<Self, Error> {
        Problem::resolve(self.spec.clone().with_resolution(resolution))
    }

    /// Sequential summation (deterministic mode); parallel reduction also
    /// uses fixed chunking, so both modes reproduce bitwise.
    pub fn sequential(&self) -> bool {
        self.spec.deterministic
    }

    /// Explicit λ from the configuration, or None for "auto".
    pub fn lambda_override(&self) -> Option<f64> {
        match &self.spec.lambda {
            LambdaConfig::Value(v) => Some(*v),
            LambdaConfig::Keyword(_) => None,
        }
    }

    /// Minimum of q over the interior nodes (declared bounds win if given).
    pub fn q_minus(&self) -> f64 {
        if let Some((lo, _)) = self.q.declared_bounds {
            return lo;
        }
        self.mesh
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.region == CellRegion::Interior)
            .map(|(i, _)| self.cell.q[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// Σ_{interior} m |u/τ|^{p̄}.
    pub fn interior_pbar_modular_scaled(&self, u: &crate::mesh::GridFunction, tau: f64) -> f64 {
        let mut s = 0.0;
        for (i, c) in self.mesh.cells.iter().enumerate() {
            if c.region != CellRegion::Interior {
                continue;
            }
            let a = u.values[i].abs();
            if a > 0.0 {
                s += c.measure * (a / tau).powf(self.cell.pbar[i]);
            }
        }
        s
    }

    /// Σ_{collar} m·w |u/τ|^{p̄} with w ∈ {|g|, β, |g|+β}.
    pub fn collar_weighted_modular_scaled(
        &self,
        u: &crate::mesh::GridFunction,
        tau: f64,
        which: crate::modular::CollarWeight,
    ) -> f64 {
        let mut s = 0.0;
        for (i, c) in self.mesh.cells.iter().enumerate() {
            if c.region != CellRegion::Collar {
                continue;
            }
            let w = match which {
                crate::modular::CollarWeight::G => self.cell.g_abs[i],
                crate::modular::CollarWeight::Beta => self.cell.beta[i],
                crate::modular::CollarWeight::GPlusBeta => self.cell.g_abs[i] + self.cell.beta[i],
            };
            if w == 0.0 {
                continue;
            }
            let a = u.values[i].abs();
            if a > 0.0 {
                s += c.measure * w * (a / tau).powf(self.cell.pbar[i]);
            }
        }
        s
    }
}
