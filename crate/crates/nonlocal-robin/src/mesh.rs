//! Ω, the truncated exterior collar, uniform tensor meshes, and grid
//! functions.
//!
//! The exterior ℝᴺ∖Ω is modelled by a collar of radius R around the
//! interior box; the neglected kernel tail is O(R^{−s·p⁻}) for bounded
//! functions and the pipeline reports the measured change when R doubles.
//! Collar cells are sized so the collar extent is exactly R per side
//! (width R/ceil(R/h), which equals the interior width h whenever R is a
//! multiple of h), making region measures refinement-invariant.
//!
//! Grid functions are cell-centered and piecewise constant. Double
//! integrals over cell pairs use midpoint quadrature for separated pairs
//! and a per-axis 2-point Gauss rule with dyadic grading toward the shared
//! face for touching pairs; the diagonal self-pair of a piecewise-constant
//! function contributes nothing because u(x) − u(y) vanishes within a cell.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::geometry::{AxisBox, Point};
use crate::quad::{map_rule, GaussRule, GL2, GL4};
use crate::Error;

/// Region tag of a mesh cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellRegion {
    Interior,
    Collar,
}

/// Interior box plus collar radius; the computational stand-in for
/// (Ω, ℝᴺ∖Ω).
#[derive(Clone, Copy, Debug)]
pub struct Domain {
    pub dim: usize,
    pub interior: AxisBox,
    pub collar_radius: f64,
}

impl Domain {
    pub fn new(interior: AxisBox, collar_radius: f64) -> Result<Self, Error> {
        if interior.is_degenerate() {
            return Err(Error::InvalidSpec("interior box is degenerate".into()));
        }
        if !(collar_radius > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "collar radius must be positive, got {collar_radius}"
            )));
        }
        Ok(Domain { dim: interior.dim(), interior, collar_radius })
    }

    pub fn unit(dim: usize) -> Self {
        let b = match dim {
            1 => AxisBox::interval(0.0, 1.0),
            _ => AxisBox::rect([0.0, 0.0], [1.0, 1.0]),
        };
        Domain { dim, interior: b, collar_radius: 1.0 }
    }

    /// Euclidean diameter of the interior box.
    pub fn diameter(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.interior.width(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// The full computational box Ω ∪ collar.
    pub fn outer_box(&self) -> AxisBox {
        self.interior.expanded(self.collar_radius)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Cell {
    pub bounds: AxisBox,
    pub center: Point,
    pub measure: f64,
    pub region: CellRegion,
}

/// Uniform tensor mesh over Ω ∪ collar, cell-centered nodes, deterministic
/// lexicographic ordering.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub domain: Domain,
    pub cells: Vec<Cell>,
    /// Interior cell width per axis.
    pub h: [f64; 2],
    n_interior: usize,
    interior_measure: f64,
    collar_measure: f64,
}

fn axis_lines(lo: f64, hi: f64, res: usize, collar: f64) -> (Vec<f64>, usize) {
    let h = (hi - lo) / res as f64;
    let nc = ((collar / h) - 1e-9).ceil().max(1.0) as usize;
    let wc = collar / nc as f64;
    let mut lines = Vec::with_capacity(res + 2 * nc + 1);
    for k in 0..nc {
        lines.push(lo - collar + k as f64 * wc);
    }
    for i in 0..=res {
        lines.push(lo + i as f64 * h);
    }
    for k in 1..=nc {
        lines.push(hi + k as f64 * wc);
    }
    (lines, nc)
}

impl Mesh {
    /// Build a mesh with `resolution` interior cells per axis.
    pub fn build(domain: &Domain, resolution: usize, pair_budget: usize) -> Result<Self, Error> {
        if resolution < 4 {
            return Err(Error::InvalidSpec(format!(
                "resolution must be at least 4, got {resolution}"
            )));
        }
        let h0 = domain.interior.width(0) / resolution as f64;
        let hmax = (0..domain.dim)
            .map(|a| domain.interior.width(a) / resolution as f64)
            .fold(0.0, f64::max);
        if domain.collar_radius < hmax * (1.0 - 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "collar radius {} is below one interior cell width {hmax}",
                domain.collar_radius
            )));
        }

        let mut cells = Vec::new();
        let r = domain.collar_radius;
        if domain.dim == 1 {
            let (lines, nc) = axis_lines(domain.interior.lo(0), domain.interior.hi(0), resolution, r);
            for i in 0..lines.len() - 1 {
                let b = AxisBox::interval(lines[i], lines[i + 1]);
                let region = if i >= nc && i < nc + resolution {
                    CellRegion::Interior
                } else {
                    CellRegion::Collar
                };
                cells.push(Cell { bounds: b, center: b.center(), measure: b.measure(), region });
            }
        } else {
            let (lx, ncx) = axis_lines(domain.interior.lo(0), domain.interior.hi(0), resolution, r);
            let (ly, ncy) = axis_lines(domain.interior.lo(1), domain.interior.hi(1), resolution, r);
            for iy in 0..ly.len() - 1 {
                for ix in 0..lx.len() - 1 {
                    let b = AxisBox::rect([lx[ix], ly[iy]], [lx[ix + 1], ly[iy + 1]]);
                    let inside = ix >= ncx
                        && ix < ncx + resolution
                        && iy >= ncy
                        && iy < ncy + resolution;
                    let region = if inside { CellRegion::Interior } else { CellRegion::Collar };
                    cells.push(Cell {
                        bounds: b,
                        center: b.center(),
                        measure: b.measure(),
                        region,
                    });
                }
            }
        }

        let n_interior = cells.iter().filter(|c| c.region == CellRegion::Interior).count();
        let interior_measure: f64 = cells
            .iter()
            .filter(|c| c.region == CellRegion::Interior)
            .map(|c| c.measure)
            .sum();
        let collar_measure: f64 = cells
            .iter()
            .filter(|c| c.region == CellRegion::Collar)
            .map(|c| c.measure)
            .sum();

        let h1 = if domain.dim == 2 {
            domain.interior.width(1) / resolution as f64
        } else {
            0.0
        };
        let mesh = Mesh {
            dim: domain.dim,
            domain: *domain,
            cells,
            h: [h0, h1],
            n_interior,
            interior_measure,
            collar_measure,
        };
        let pairs = mesh.pair_count();
        if pairs > pair_budget {
            return Err(Error::MeshTooLarge { pairs, budget: pair_budget });
        }
        Ok(mesh)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_collar(&self) -> usize {
        self.cells.len() - self.n_interior
    }

    pub fn interior_measure(&self) -> f64 {
        self.interior_measure
    }

    pub fn collar_measure(&self) -> f64 {
        self.collar_measure
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.cells[i].region == CellRegion::Interior
    }

    /// Number of unordered cell pairs with at least one interior cell
    /// (collar×collar excluded, interior self-pairs included).
    pub fn pair_count(&self) -> usize {
        let n = self.cells.len();
        let c = self.n_collar();
        n * (n + 1) / 2 - c * (c + 1) / 2
    }

    /// Unordered cell pairs of the admissible region ℝ²ᴺ∖(𝒞Ω)², each once,
    /// with the product-measure weight and a diagonal flag for the
    /// singular self-pair treatment.
    pub fn pairs(&self) -> impl Iterator<Item = CellPair> + '_ {
        let n = self.cells.len();
        (0..n).flat_map(move |i| {
            (i..n).filter_map(move |j| {
                if self.is_interior(i) || self.is_interior(j) {
                    Some(CellPair {
                        i,
                        j,
                        weight: self.cells[i].measure * self.cells[j].measure,
                        is_diagonal: i == j,
                    })
                } else {
                    None
                }
            })
        })
    }

    /// Cell index containing `p`, if any.
    pub fn locate(&self, p: &Point) -> Option<usize> {
        self.cells.iter().position(|c| c.bounds.contains(p))
    }

    /// Distance from a point to the interior box.
    pub fn dist_to_interior(&self, p: &Point) -> f64 {
        self.domain.interior.dist_to_point(p)
    }
}

/// One unordered cell pair from the admissible double-integration region.
#[derive(Clone, Copy, Debug)]
pub struct CellPair {
    pub i: usize,
    pub j: usize,
    /// measure_i · measure_j
    pub weight: f64,
    pub is_diagonal: bool,
}

impl CellPair {
    /// Multiplicity of the pair inside the full (ordered) double integral.
    pub fn symmetry_factor(&self) -> f64 {
        if self.is_diagonal {
            1.0
        } else {
            2.0
        }
    }
}

/// Quadrature policy for one cell pair.
#[derive(Clone, Copy, Debug)]
pub struct PairRule {
    /// Gauss points per axis on separated pairs (1 = midpoint).
    pub far_points: usize,
    /// Gauss points per axis on touching pairs.
    pub touch_points: usize,
    /// Dyadic grading levels toward a shared face/corner.
    pub touch_levels: u32,
    /// Dyadic levels along the diagonal of a self-pair (0 skips self-pairs;
    /// correct for piecewise-constant data, whose in-cell increments vanish).
    pub diagonal_levels: u32,
}

/// Rule for piecewise-constant grid data.
pub const GRID_RULE: PairRule = PairRule {
    far_points: 1,
    touch_points: 2,
    touch_levels: 3,
    diagonal_levels: 0,
};

/// Rule for smooth integrands evaluated analytically (identity checks).
pub const ANALYTIC_RULE: PairRule = PairRule {
    far_points: 2,
    touch_points: 2,
    touch_levels: 6,
    diagonal_levels: 8,
};

fn rule_for(points: usize) -> GaussRule {
    match points {
        1 => &[(0.0, 2.0)],
        2 => GL2,
        _ => GL4,
    }
}

fn touching(a: &AxisBox, b: &AxisBox) -> bool {
    a.gap_inf(b) <= 1e-12 * a.max_width().max(b.max_width())
}

fn leaf_nodes<F: FnMut(Point, Point, f64)>(a: &AxisBox, b: &AxisBox, rule: &PairRule, f: &mut F) {
    let r = if touching(a, b) {
        rule_for(rule.touch_points)
    } else {
        rule_for(rule.far_points)
    };
    if a.dim() == 1 {
        for (x, wx) in map_rule(r, a.lo(0), a.hi(0)) {
            for (y, wy) in map_rule(r, b.lo(0), b.hi(0)) {
                f(Point::new_1d(x), Point::new_1d(y), wx * wy);
            }
        }
    } else {
        for (x0, w0) in map_rule(r, a.lo(0), a.hi(0)) {
            for (x1, w1) in map_rule(r, a.lo(1), a.hi(1)) {
                for (y0, v0) in map_rule(r, b.lo(0), b.hi(0)) {
                    for (y1, v1) in map_rule(r, b.lo(1), b.hi(1)) {
                        f(Point::new_2d(x0, x1), Point::new_2d(y0, y1), w0 * w1 * v0 * v1);
                    }
                }
            }
        }
    }
}

fn visit_rec<F: FnMut(Point, Point, f64)>(
    a: &AxisBox,
    b: &AxisBox,
    rule: &PairRule,
    touch_left: u32,
    diag_left: u32,
    f: &mut F,
) {
    if a == b {
        if diag_left == 0 {
            return; // vanishing dyadic core of an absolutely convergent integral
        }
        let (kids, n) = a.children();
        for i in 0..n {
            for j in 0..n {
                visit_rec(
                    &kids[i],
                    &kids[j],
                    rule,
                    touch_left.min(diag_left - 1),
                    diag_left - 1,
                    f,
                );
            }
        }
    } else if touching(a, b) && touch_left > 0 {
        let (ka, na) = a.children();
        let (kb, nb) = b.children();
        for i in 0..na {
            for j in 0..nb {
                visit_rec(&ka[i], &kb[j], rule, touch_left - 1, diag_left, f);
            }
        }
    } else {
        leaf_nodes(a, b, rule, f);
    }
}

/// Visit quadrature nodes (x, y, w) approximating ∫_a ∫_b dy dx under the
/// given pair rule. Node sets are mirror-symmetric under swapping the two
/// boxes, so antisymmetric integrands cancel to rounding.
pub fn visit_pair_nodes<F: FnMut(Point, Point, f64)>(
    a: &AxisBox,
    b: &AxisBox,
    rule: &PairRule,
    f: &mut F,
) {
    if a == b && rule.diagonal_levels == 0 {
        return;
    }
    visit_rec(a, b, rule, rule.touch_levels, rule.diagonal_levels, f);
}

/// Precomputed kernel quadrature for all admissible cell pairs:
/// per node the exponent p_q = p(x_q, y_q) and the weight
/// c_q = w_q / |x_q − y_q|^{N + s p_q}. Grid-function modulars, forms and
/// gradients are then tight loops over these tables.
pub struct PairAssembly {
    pub pair_i: Vec<u32>,
    pub pair_j: Vec<u32>,
    node_start: Vec<u32>,
    node_p: Vec<f64>,
    node_c: Vec<f64>,
}

impl PairAssembly {
    pub fn build(
        mesh: &Mesh,
        p: &crate::exponents::KernelExponent,
        s: f64,
        rule: &PairRule,
    ) -> Self {
        let dim = mesh.dim as i32;
        let mut pair_i = Vec::new();
        let mut pair_j = Vec::new();
        let mut node_start = vec![0u32];
        let mut node_p = Vec::new();
        let mut node_c = Vec::new();
        let mut scratch: Vec<(f64, f64)> = Vec::new();
        for pair in mesh.pairs() {
            if pair.is_diagonal {
                continue; // no in-cell increment for piecewise-constant data
            }
            let a = &mesh.cells[pair.i].bounds;
            let b = &mesh.cells[pair.j].bounds;
            scratch.clear();
            visit_pair_nodes(a, b, rule, &mut |x, y, w| {
                let pe = p.eval(&x, &y);
                let r = x.dist(&y);
                let c = w * r.powf(-(dim as f64) - s * pe);
                // nodes sharing an exponent are interchangeable in every
                // consumer; merging collapses constant-exponent pairs to a
                // single entry
                match scratch.iter_mut().find(|(q, _)| *q == pe) {
                    Some((_, acc)) => *acc += c,
                    None => scratch.push((pe, c)),
                }
            });
            for &(pe, c) in &scratch {
                node_p.push(pe);
                node_c.push(c);
            }
            pair_i.push(pair.i as u32);
            pair_j.push(pair.j as u32);
            node_start.push(node_p.len() as u32);
        }
        PairAssembly { pair_i, pair_j, node_start, node_p, node_c }
    }

    pub fn n_pairs(&self) -> usize {
        self.pair_i.len()
    }

    pub fn nodes(&self, k: usize) -> (&[f64], &[f64]) {
        let a = self.node_start[k] as usize;
        let b = self.node_start[k + 1] as usize;
        (&self.node_p[a..b], &self.node_c[a..b])
    }

    /// Sum `per_pair(k)` over pairs. Parallel reduction uses fixed chunking
    /// with an ordered combine, so results are reproducible run to run;
    /// `sequential` forces plain left-to-right summation.
    pub fn fold<F>(&self, sequential: bool, per_pair: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let n = self.n_pairs();
        if sequential || n < 8192 {
            (0..n).map(per_pair).sum()
        } else {
            const CHUNK: usize = 4096;
            let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
            let partials: Vec<f64> = starts
                .par_iter()
                .map(|&s| (s..(s + CHUNK).min(n)).map(&per_pair).sum())
                .collect();
            partials.iter().sum()
        }
    }
}

/// Nodal values on a mesh: the discrete stand-in for u ∈ X.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(mesh: &Mesh) -> Self {
        GridFunction { values: vec![0.0; mesh.n_cells()] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        GridFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn axpy(&mut self, alpha: f64, other: &GridFunction) {
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += alpha * o;
        }
    }

    pub fn dot(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sup_dist(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Serialize as CSV with columns cell_index, x[, y], region, value.
    pub fn write_csv<W: Write>(&self, mesh: &Mesh, out: &mut W) -> std::io::Result<()> {
        if mesh.dim == 1 {
            writeln!(out, "cell_index,x,region,value")?;
        } else {
            writeln!(out, "cell_index,x,y,region,value")?;
        }
        for (i, cell) in mesh.cells.iter().enumerate() {
            let region = match cell.region {
                CellRegion::Interior => "interior",
                CellRegion::Collar => "collar",
            };
            if mesh.dim == 1 {
                writeln!(out, "{},{},{},{}", i, cell.center.coord(0), region, self.values[i])?;
            } else {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    i,
                    cell.center.coord(0),
                    cell.center.coord(1),
                    region,
                    self.values[i]
                )?;
            }
        }
        Ok(())
    }
}

/// Sample a function at the cell centers.
pub fn interpolate<F: Fn(&Point) -> f64>(f: F, mesh: &Mesh) -> Result<GridFunction, Error> {
    let mut values = Vec::with_capacity(mesh.n_cells());
    for (i, cell) in mesh.cells.iter().enumerate() {
        let v = f(&cell.center);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { cell: i, x: cell.center.coords().to_vec() });
        }
        values.push(v);
    }
    Ok(GridFunction { values })
}
