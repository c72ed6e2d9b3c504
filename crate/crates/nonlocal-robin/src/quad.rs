//! Gauss–Legendre rules and graded box quadrature.
//!
//! The graded routine integrates a smooth-away-from-one-point integrand over
//! an axis-aligned box by recursive bisection until the admissibility
//! condition `diam(box) <= theta * dist(box, singular_point)` holds, then
//! applies a tensor Gauss rule. It is the workhorse behind the pointwise
//! nonlocal operators, where the singular point always lies outside the box.

use crate::geometry::{AxisBox, Point};

/// (node, weight) pairs on [-1, 1].
pub type GaussRule = &'static [(f64, f64)];

pub const GL2: GaussRule = &[
    (-0.5773502691896257, 1.0),
    (0.5773502691896257, 1.0),
];

pub const GL4: GaussRule = &[
    (-0.8611363115940526, 0.34785484513745385),
    (-0.33998104358485626, 0.6521451548625461),
    (0.33998104358485626, 0.6521451548625461),
    (0.8611363115940526, 0.34785484513745385),
];

pub const GL8: GaussRule = &[
    (-0.9602898564975363, 0.10122853629037626),
    (-0.7966664774136267, 0.22238103445337447),
    (-0.525532409916329, 0.31370664587788727),
    (-0.1834346424956498, 0.362683783378362),
    (0.1834346424956498, 0.362683783378362),
    (0.525532409916329, 0.31370664587788727),
    (0.7966664774136267, 0.22238103445337447),
    (0.9602898564975363, 0.10122853629037626),
];

pub const GL16: GaussRule = &[
    (-0.9894009349916499, 0.027152459411754096),
    (-0.9445750230732326, 0.062253523938647894),
    (-0.8656312023878318, 0.09515851168249279),
    (-0.755404408355003, 0.12462897125553388),
    (-0.6178762444026438, 0.14959598881657674),
    (-0.45801677765722737, 0.16915651939500254),
    (-0.2816035507792589, 0.18260341504492358),
    (-0.09501250983763744, 0.1894506104550685),
    (0.09501250983763744, 0.1894506104550685),
    (0.2816035507792589, 0.18260341504492358),
    (0.45801677765722737, 0.16915651939500254),
    (0.6178762444026438, 0.14959598881657674),
    (0.755404408355003, 0.12462897125553388),
    (0.8656312023878318, 0.09515851168249279),
    (0.9445750230732326, 0.062253523938647894),
    (0.9894009349916499, 0.027152459411754096),
];

/// Gauss points of `rule` mapped to the 1-d interval `[a, b]`.
pub fn map_rule(rule: GaussRule, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + 'static {
    let mid = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    rule.iter().map(move |&(x, w)| (mid + hw * x, w * hw))
}

/// Tensor Gauss quadrature of `f` over `b`.
pub fn integrate_box<F: FnMut(Point) -> f64>(f: &mut F, b: &AxisBox, rule: GaussRule) -> f64 {
    if b.dim() == 1 {
        let mut s = 0.0;
        for (x, w) in map_rule(rule, b.lo(0), b.hi(0)) {
            s += w * f(Point::new_1d(x));
        }
        s
    } else {
        let mut s = 0.0;
        for (x, wx) in map_rule(rule, b.lo(0), b.hi(0)) {
            for (y, wy) in map_rule(rule, b.lo(1), b.hi(1)) {
                s += wx * wy * f(Point::new_2d(x, y));
            }
        }
        s
    }
}

/// Graded quadrature of `f` over `b` with a singularity of `f` at `x0`,
/// which must lie outside the open box. Boxes are bisected along their
/// longest axis until `diam <= theta * dist(box, x0)`, concentrating work
/// where the integrand peaks.
pub fn integrate_box_graded<F: FnMut(Point) -> f64>(
    f: &mut F,
    b: &AxisBox,
    x0: &Point,
    theta: f64,
    rule: GaussRule,
    max_depth: u32,
) -> f64 {
    debug_assert!(
        !b.contains_strict(x0),
        "graded quadrature requires the singular point outside the box"
    );
    fn go<F: FnMut(Point) -> f64>(
        f: &mut F,
        b: &AxisBox,
        x0: &Point,
        theta: f64,
        rule: GaussRule,
        depth: u32,
    ) -> f64 {
        let d = b.dist_to_point(x0);
        if depth == 0 || (d > 0.0 && b.max_width() <= theta * d) {
            integrate_box(f, b, rule)
        } else {
            let (l, r) = b.split_axis(b.longest_axis());
            go(f, &l, x0, theta, rule, depth - 1) + go(f, &r, x0, theta, rule, depth - 1)
        }
    }
    go(f, b, x0, theta, rule, max_depth)
}
