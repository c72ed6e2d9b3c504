//! Points and axis-aligned boxes in one or two dimensions.
//!
//! Everything downstream (meshes, kernels, quadrature) works on these two
//! types. The second coordinate of a 1-d object is kept at zero so the same
//! storage serves both dimensions.

/// Spatial point in 1 or 2 dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; 2],
    dim: usize,
}

impl Point {
    pub fn new_1d(x: f64) -> Self {
        Point { coords: [x, 0.0], dim: 1 }
    }

    pub fn new_2d(x: f64, y: f64) -> Self {
        Point { coords: [x, y], dim: 2 }
    }

    /// Build from a coordinate slice of length 1 or 2.
    pub fn from_coords(coords: &[f64]) -> Self {
        match coords.len() {
            1 => Point::new_1d(coords[0]),
            2 => Point::new_2d(coords[0], coords[1]),
            d => panic!("unsupported dimension {d}"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord(&self, axis: usize) -> f64 {
        debug_assert!(axis < self.dim);
        self.coords[axis]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    /// Sum of coordinates; the symmetric presets evaluate on this.
    pub fn coord_sum(&self) -> f64 {
        self.coords[..self.dim].iter().sum()
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for a in 0..self.dim {
            let d = self.coords[a] - other.coords[a];
            s += d * d;
        }
        s.sqrt()
    }

    /// Sup-norm distance.
    pub fn dist_inf(&self, other: &Point) -> f64 {
        let mut m = 0.0f64;
        for a in 0..self.dim {
            m = m.max((self.coords[a] - other.coords[a]).abs());
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.coords[..self.dim].iter().all(|c| c.is_finite())
    }
}

/// Closed axis-aligned box (an interval in 1-d, a rectangle in 2-d).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBox {
    lo: [f64; 2],
    hi: [f64; 2],
    dim: usize,
}

impl AxisBox {
    pub fn interval(lo: f64, hi: f64) -> Self {
        AxisBox { lo: [lo, 0.0], hi: [hi, 0.0], dim: 1 }
    }

    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Self {
        AxisBox { lo, hi, dim: 2 }
    }

    /// Build from per-axis `[lo, hi]` pairs (1 or 2 of them).
    pub fn from_bounds(bounds: &[[f64; 2]]) -> Self {
        match bounds.len() {
            1 => AxisBox::interval(bounds[0][0], bounds[0][1]),
            2 => AxisBox::rect([bounds[0][0], bounds[1][0]], [bounds[0][1], bounds[1][1]]),
            d => panic!("unsupported dimension {d}"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn max_width(&self) -> f64 {
        (0..self.dim).map(|a| self.width(a)).fold(0.0, f64::max)
    }

    pub fn longest_axis(&self) -> usize {
        if self.dim == 1 || self.width(0) >= self.width(1) {
            0
        } else {
            1
        }
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|a| self.width(a)).product()
    }

    pub fn center(&self) -> Point {
        let c = [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        ];
        Point { coords: c, dim: self.dim }
    }

    pub fn is_degenerate(&self) -> bool {
        (0..self.dim).any(|a| !(self.width(a) > 0.0))
    }

    /// Closed containment.
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| p.coord(a) >= self.lo[a] && p.coord(a) <= self.hi[a])
    }

    pub fn contains_strict(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| p.coord(a) > self.lo[a] && p.coord(a) < self.hi[a])
    }

    /// Euclidean distance from a point to the box (zero inside).
    pub fn dist_to_point(&self, p: &Point) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            let d = (self.lo[a] - p.coord(a)).max(p.coord(a) - self.hi[a]).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }

    /// Sup-norm gap between two boxes; zero iff the closures intersect.
    pub fn gap_inf(&self, other: &AxisBox) -> f64 {
        let mut m = 0.0f64;
        for a in 0..self.dim {
            let g = (self.lo[a] - other.hi[a]).max(other.lo[a] - self.hi[a]).max(0.0);
            m = m.max(g);
        }
        m
    }

    pub fn expanded(&self, r: f64) -> AxisBox {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for a in 0..self.dim {
            lo[a] -= r;
            hi[a] += r;
        }
        AxisBox { lo, hi, dim: self.dim }
    }

    pub fn split_axis(&self, axis: usize) -> (AxisBox, AxisBox) {
        let mid = 0.5 * (self.lo[axis] + self.hi[axis]);
        let mut left = *self;
        let mut right = *self;
        left.hi[axis] = mid;
        right.lo[axis] = mid;
        (left, right)
    }

    /// The 2^dim dyadic children.
    pub fn children(&self) -> ([AxisBox; 4], usize) {
        let mut out = [*self; 4];
        if self.dim == 1 {
            let (a, b) = self.split_axis(0);
            out[0] = a;
            out[1] = b;
            (out, 2)
        } else {
            let (l, r) = self.split_axis(0);
            let (ll, lu) = l.split_axis(1);
            let (rl, ru) = r.split_axis(1);
            out[0] = ll;
            out[1] = rl;
            out[2] = lu;
            out[3] = ru;
            (out, 4)
        }
    }
}
