//! Variable-exponent modulars, Luxemburg norms, the Gagliardo seminorm,
//! the X-norm and its equivalent modular norm, and Hölder utilities.
//!
//! All Luxemburg-type norms share one bracketing/bisection engine: the
//! modular of u/τ is strictly decreasing in τ, so doubling/halving from
//! τ = 1 brackets the unit level set and bisection converges globally.
//! Relative tolerance on τ is 1e−10 with a 200-iteration cap, and the
//! modular at the returned τ is certified inside [1 − 1e−8, 1 + 1e−8].
//!
//! The g-weighted terms use |g| (as in the X-norm definition): with signed
//! g only |g| yields a norm, and the existence stage sets g ≡ 0 anyway.

use serde::{Deserialize, Serialize};

use crate::config::Problem;
use crate::exponents::{conjugate_exponent, Region, ScalarField};
use crate::mesh::{CellRegion, GridFunction, Mesh, PairAssembly};
use crate::Error;

pub const LUXEMBURG_REL_TOL: f64 = 1e-10;
pub const LUXEMBURG_MODULAR_TOL: f64 = 1e-8;
const MAX_STEPS: u32 = 200;

/// Solve modular(u/τ) = 1 for τ by bracketing and bisection.
///
/// `modular_at` receives τ and must return the modular of u/τ, a
/// nonincreasing function of τ. Returns 0 for the zero function.
pub fn luxemburg<F: FnMut(f64) -> f64>(modular_at: F) -> Result<f64, Error> {
    luxemburg_warm(modular_at, None)
}

/// Like [`luxemburg`], seeded with a previous solution to shorten the
/// bracketing phase (descent loops re-solve for slowly drifting iterates).
pub fn luxemburg_warm<F: FnMut(f64) -> f64>(
    mut modular_at: F,
    hint: Option<f64>,
) -> Result<f64, Error> {
    // The modular is a sum of nonnegative monomials in 1/τ: if it vanishes
    // at one τ it vanishes identically, i.e. the function is zero.
    if modular_at(1.0) == 0.0 {
        return Ok(0.0);
    }
    if let Some(t) = hint {
        if t > 0.0 && t.is_finite() {
            let (lo, hi) = (t * 0.7, t * 1.5);
            if modular_at(lo) >= 1.0 && modular_at(hi) <= 1.0 {
                return bisect(modular_at, lo, hi);
            }
        }
    }
    let m1 = modular_at(1.0);
    let (mut lo, mut hi);
    if m1 >= 1.0 {
        // grow τ until the modular drops below 1
        lo = 1.0;
        hi = 1.0;
        let mut steps = 0;
        loop {
            hi *= 2.0;
            if modular_at(hi) <= 1.0 {
                break;
            }
            steps += 1;
            if steps >= MAX_STEPS {
                return Err(Error::BracketFailure(MAX_STEPS));
            }
        }
    } else {
        // shrink τ until the modular exceeds 1 (or stays 0: zero function)
        hi = 1.0;
        lo = 1.0;
        let mut steps = 0;
        loop {
            lo *= 0.5;
            let m = modular_at(lo);
            if m >= 1.0 {
                break;
            }
            steps += 1;
            if steps >= MAX_STEPS {
                if m == 0.0 {
                    return Ok(0.0);
                }
                return Err(Error::BracketFailure(MAX_STEPS));
            }
        }
    }

    bisect(modular_at, lo, hi)
}

fn bisect<F: FnMut(f64) -> f64>(mut modular_at: F, mut lo: f64, mut hi: f64) -> Result<f64, Error> {
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_STEPS {
        mid = 0.5 * (lo + hi);
        let m = modular_at(mid);
        if m >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= LUXEMBURG_REL_TOL * hi && (m - 1.0).abs() <= LUXEMBURG_MODULAR_TOL {
            return Ok(mid);
        }
    }
    Ok(mid)
}

fn region_matches(cell: CellRegion, sel: Region) -> bool {
    match sel {
        Region::Both => true,
        Region::Interior => cell == CellRegion::Interior,
        Region::Collar => cell == CellRegion::Collar,
    }
}

/// ∫_region weight(x) |u(x)|^{p(x)} dx by midpoint quadrature.
pub fn lebesgue_modular(
    u: &GridFunction,
    mesh: &Mesh,
    p: &ScalarField,
    weight: Option<&ScalarField>,
    region: Region,
) -> f64 {
    let mut s = 0.0;
    for (i, cell) in mesh.cells.iter().enumerate() {
        if !region_matches(cell.region, region) {
            continue;
        }
        let w = weight.map_or(1.0, |f| f.eval(&cell.center));
        if w == 0.0 {
            continue;
        }
        let pv = p.eval(&cell.center);
        s += cell.measure * w * u.values[i].abs().powf(pv);
    }
    s
}

/// Luxemburg norm of the weighted Lebesgue modular.
pub fn lebesgue_norm(
    u: &GridFunction,
    mesh: &Mesh,
    p: &ScalarField,
    weight: Option<&ScalarField>,
    region: Region,
) -> Result<f64, Error> {
    // Evaluate fields once; the bisection loop only rescales.
    let mut terms: Vec<(f64, f64)> = Vec::new(); // (measure·weight, exponent), |u| folded in below
    let mut vals: Vec<f64> = Vec::new();
    for (i, cell) in mesh.cells.iter().enumerate() {
        if !region_matches(cell.region, region) {
            continue;
        }
        let w = weight.map_or(1.0, |f| f.eval(&cell.center));
        if w == 0.0 {
            continue;
        }
        terms.push((cell.measure * w, p.eval(&cell.center)));
        vals.push(u.values[i].abs());
    }
    luxemburg(move |tau| {
        terms
            .iter()
            .zip(&vals)
            .map(|(&(mw, pe), &av)| mw * (av / tau).powf(pe))
            .sum()
    })
}

/// Gagliardo modular: the full double integral over ℝ²ᴺ∖(𝒞Ω)² (truncated)
/// of |u(x)−u(y)|^{p(x,y)} / |x−y|^{N+s·p(x,y)}, each unordered pair
/// counted twice; optionally with the 1/p(x,y) weight inside the integral.
pub fn gagliardo_modular(
    u: &GridFunction,
    asm: &PairAssembly,
    inv_p_weight: bool,
    sequential: bool,
) -> f64 {
    2.0 * asm.fold(sequential, |k| {
        let d = (u.values[asm.pair_i[k] as usize] - u.values[asm.pair_j[k] as usize]).abs();
        if d == 0.0 {
            return 0.0;
        }
        let (ps, cs) = asm.nodes(k);
        let mut acc = 0.0;
        for (pe, c) in ps.iter().zip(cs) {
            let t = c * d.powf(*pe);
            acc += if inv_p_weight { t / pe } else { t };
        }
        acc
    })
}

/// Gagliardo seminorm: Luxemburg norm of the unweighted Gagliardo modular.
pub fn gagliardo_seminorm(
    u: &GridFunction,
    asm: &PairAssembly,
    sequential: bool,
) -> Result<f64, Error> {
    luxemburg(|tau| {
        2.0 * asm.fold(sequential, |k| {
            let d =
                (u.values[asm.pair_i[k] as usize] - u.values[asm.pair_j[k] as usize]).abs() / tau;
            if d == 0.0 {
                return 0.0;
            }
            let (ps, cs) = asm.nodes(k);
            ps.iter().zip(cs).map(|(pe, c)| c * d.powf(*pe)).sum()
        })
    })
}

/// The four Luxemburg norms composing ‖·‖_X and their sum.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NormBreakdown {
    pub seminorm: f64,
    pub interior: f64,
    pub g_term: f64,
    pub beta_term: f64,
    pub total: f64,
}

/// Warm-start state for repeated X-norm evaluations of drifting iterates.
#[derive(Clone, Copy, Debug, Default)]
pub struct XNormWarm {
    pub seminorm: Option<f64>,
    pub interior: Option<f64>,
    pub g_term: Option<f64>,
    pub beta_term: Option<f64>,
}

/// ‖u‖_X = [u] + ‖u‖_{L^{p̄}(Ω)} + ‖|g|^{1/p̄} u‖_{L^{p̄}(𝒞Ω)}
///        + ‖β^{1/p̄} u‖_{L^{p̄}(𝒞Ω)}.
pub fn x_norm(u: &GridFunction, prob: &Problem) -> Result<NormBreakdown, Error> {
    x_norm_warm(u, prob, &mut XNormWarm::default())
}

/// X-norm with warm-started bisections; updates `warm` with the new parts.
pub fn x_norm_warm(
    u: &GridFunction,
    prob: &Problem,
    warm: &mut XNormWarm,
) -> Result<NormBreakdown, Error> {
    let seq = prob.sequential();
    let asm = &prob.assembly;
    let seminorm = luxemburg_warm(
        |tau| {
            2.0 * asm.fold(seq, |k| {
                let d = (u.values[asm.pair_i[k] as usize] - u.values[asm.pair_j[k] as usize])
                    .abs()
                    / tau;
                if d == 0.0 {
                    return 0.0;
                }
                let (ps, cs) = asm.nodes(k);
                ps.iter().zip(cs).map(|(pe, c)| c * d.powf(*pe)).sum()
            })
        },
        warm.seminorm,
    )?;
    let interior = luxemburg_warm(
        |tau| prob.interior_pbar_modular_scaled(u, tau),
        warm.interior,
    )?;
    let g_term = luxemburg_warm(
        |tau| prob.collar_weighted_modular_scaled(u, tau, CollarWeight::G),
        warm.g_term,
    )?;
    let beta_term = luxemburg_warm(
        |tau| prob.collar_weighted_modular_scaled(u, tau, CollarWeight::Beta),
        warm.beta_term,
    )?;
    *warm = XNormWarm {
        seminorm: (seminorm > 0.0).then_some(seminorm),
        interior: (interior > 0.0).then_some(interior),
        g_term: (g_term > 0.0).then_some(g_term),
        beta_term: (beta_term > 0.0).then_some(beta_term),
    };
    Ok(NormBreakdown {
        seminorm,
        interior,
        g_term,
        beta_term,
        total: seminorm + interior + g_term + beta_term,
    })
}

/// Selector for the collar weight in the X-norm terms.
#[derive(Clone, Copy, Debug)]
pub enum CollarWeight {
    G,
    Beta,
    GPlusBeta,
}

/// The modular ρ of the equivalent norm: 1/p-weighted Gagliardo term plus
/// ∫_Ω |u|^{p̄}/p̄ plus the (|g|/p̄)- and (β/p̄)-weighted collar terms.
pub fn x_modular(u: &GridFunction, prob: &Problem) -> f64 {
    x_modular_scaled(u, prob, 1.0)
}

pub(crate) fn x_modular_scaled(u: &GridFunction, prob: &Problem, tau: f64) -> f64 {
    let seq = prob.sequential();
    let asm = &prob.assembly;
    let pair = asm.fold(seq, |k| {
        let d = (u.values[asm.pair_i[k] as usize] - u.values[asm.pair_j[k] as usize]).abs() / tau;
        if d == 0.0 {
            return 0.0;
        }
        let (ps, cs) = asm.nodes(k);
        ps.iter().zip(cs).map(|(pe, c)| c * d.powf(*pe) / pe).sum()
    });
    let mut local = 0.0;
    for (i, cell) in prob.mesh.cells.iter().enumerate() {
        let pb = prob.cell.pbar[i];
        let a = (u.values[i] / tau).abs();
        if a == 0.0 {
            continue;
        }
        match cell.region {
            CellRegion::Interior => local += cell.measure * a.powf(pb) / pb,
            CellRegion::Collar => {
                let w = prob.cell.g_abs[i] + prob.cell.beta[i];
                if w != 0.0 {
                    local += cell.measure * w * a.powf(pb) / pb;
                }
            }
        }
    }
    2.0 * pair + local
}

/// Luxemburg-type norm of the equivalent modular ρ.
pub fn equivalent_norm(u: &GridFunction, prob: &Problem) -> Result<f64, Error> {
    luxemburg(|tau| x_modular_scaled(u, prob, tau))
}

/// Hölder pairing: |∫ u v| against the bound
/// (1/p⁻ + 1/q⁻)·‖u‖_{p(·)}·‖v‖_{q(·)} with q the pointwise conjugate.
pub fn holder_pairing(
    u: &GridFunction,
    v: &GridFunction,
    mesh: &Mesh,
    p: &ScalarField,
    region: Region,
) -> Result<(f64, f64), Error> {
    let mut lhs = 0.0;
    let mut p_min = f64::INFINITY;
    let mut q_min = f64::INFINITY;
    let mut q_vals: Vec<(usize, f64)> = Vec::new();
    for (i, cell) in mesh.cells.iter().enumerate() {
        if !region_matches(cell.region, region) {
            continue;
        }
        lhs += cell.measure * u.values[i] * v.values[i];
        let pv = p.eval(&cell.center);
        let qv = conjugate_exponent(pv)?;
        p_min = p_min.min(pv);
        q_min = q_min.min(qv);
        q_vals.push((i, qv));
    }
    let nu = lebesgue_norm(u, mesh, p, None, region)?;
    // conjugate-exponent Luxemburg norm of v over the same cells
    let nv = luxemburg(|tau| {
        q_vals
            .iter()
            .map(|&(i, qv)| mesh.cells[i].measure * (v.values[i].abs() / tau).powf(qv))
            .sum()
    })?;
    let rhs = (1.0 / p_min + 1.0 / q_min) * nu * nv;
    Ok((lhs.abs(), rhs))
}
