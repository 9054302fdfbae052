//! Upper half-plane geometry: points, Möbius actions, the point-pair
//! invariant and angle coordinates adapted to the imaginary axis.

use thiserror::Error;

/// Determinant tolerance accepted at construction before renormalizing.
pub const DET_TOL: f64 = 1e-12;

/// Entries smaller than this (relative to the matrix scale) are treated as
/// structural zeros when classifying elements.
pub const ZERO_ENTRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point must have positive height, got y = {0}")]
    NonpositiveHeight(f64),
    #[error("matrix determinant {0} is not positive; not in PSL(2,R)")]
    NonpositiveDeterminant(f64),
    #[error("matrix entry product abcd vanishes; axis minimization undefined")]
    DegenerateEntries,
}

/// A point x + iy of the upper half-plane, y > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    x: f64,
    y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if !(y > 0.0) || !y.is_finite() || !x.is_finite() {
            return Err(GeometryError::NonpositiveHeight(y));
        }
        Ok(Point { x, y })
    }

    /// The point iy on the imaginary axis.
    pub fn on_axis(y: f64) -> Result<Self, GeometryError> {
        Point::new(0.0, y)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn modulus(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Log-radius / angle coordinates (u, v) with u = log|z| and
/// v = -arctan(x/y) ∈ (-π/2, π/2). Diagonal hyperbolic elements translate u
/// and fix v, which is what makes v the right variable along the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleCoordinates {
    pub u: f64,
    pub v: f64,
}

/// An element of PSL(2, R) as a real unimodular matrix, normalized so the
/// first entry of (a, b, c) that is meaningfully nonzero is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusElement {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MoebiusElement {
    /// Builds an element from matrix entries, rescaling so ad - bc = 1 and
    /// applying the PSL sign convention. Rejects nonpositive determinants.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GeometryError> {
        let det = a * d - b * c;
        if !(det > DET_TOL) || !det.is_finite() {
            return Err(GeometryError::NonpositiveDeterminant(det));
        }
        let s = det.sqrt();
        Ok(MoebiusElement {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
        .psl_normalized())
    }

    pub fn identity() -> Self {
        MoebiusElement {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// diag(m, 1/m), the standard hyperbolic translation along the
    /// imaginary axis with norm m².
    pub fn diagonal(m: f64) -> Result<Self, GeometryError> {
        MoebiusElement::new(m, 0.0, 0.0, 1.0 / m)
    }

    fn psl_normalized(self) -> Self {
        let scale = self.entry_scale();
        for v in [self.a, self.b, self.c] {
            if v.abs() > 1e-9 * scale {
                if v < 0.0 {
                    return MoebiusElement {
                        a: -self.a,
                        b: -self.b,
                        c: -self.c,
                        d: -self.d,
                    };
                }
                return self;
            }
        }
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Largest absolute entry, used to scale zero/equality tolerances.
    pub fn entry_scale(&self) -> f64 {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs())
            .max(1.0)
    }

    pub fn inverse(&self) -> Self {
        MoebiusElement {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .psl_normalized()
    }

    /// Matrix product of unimodular factors. The determinant is
    /// renormalized to absorb rounding drift from long words, but only
    /// while ad and bc are moderate: at large scales the difference ad - bc
    /// is pure cancellation noise and dividing by it would corrupt the
    /// product, whose true determinant is already 1 up to a few ulp.
    pub fn compose(&self, rhs: &Self) -> Self {
        let a = self.a * rhs.a + self.b * rhs.c;
        let b = self.a * rhs.b + self.b * rhs.d;
        let c = self.c * rhs.a + self.d * rhs.c;
        let d = self.c * rhs.b + self.d * rhs.d;
        let ad = a * d;
        let bc = b * c;
        let out = if ad.abs().max(bc.abs()) < 1e4 {
            let s = (ad - bc).sqrt();
            MoebiusElement {
                a: a / s,
                b: b / s,
                c: c / s,
                d: d / s,
            }
        } else {
            MoebiusElement { a, b, c, d }
        };
        out.psl_normalized()
    }

    /// diag(l, 1/l) · g · diag(r, 1/r) by exact entry scaling, preserving
    /// the determinant without recomputing it.
    pub fn two_sided_diagonal_scale(&self, l: f64, r: f64) -> Self {
        MoebiusElement {
            a: self.a * l * r,
            b: self.b * l / r,
            c: self.c * r / l,
            d: self.d / (l * r),
        }
        .psl_normalized()
    }

    /// Action (az + b)/(cz + d) on the upper half-plane.
    pub fn apply(&self, z: Point) -> Point {
        let (x, y) = (z.x, z.y);
        let re_den = self.c * x + self.d;
        let im_den = self.c * y;
        let norm = re_den * re_den + im_den * im_den;
        let re_num = self.a * x + self.b;
        let im_num = self.a * y;
        // Im((az+b)/(cz+d)) = det * y / |cz+d|^2, so positivity is automatic.
        Point {
            x: (re_num * re_den + im_num * im_den) / norm,
            y: self.det() * y / norm,
        }
    }

    /// |ad + bc|, the double-coset invariant controlling the distance
    /// between the imaginary axis and its image.
    pub fn b_invariant(&self) -> f64 {
        (self.a * self.d + self.b * self.c).abs()
    }

    /// True when the element fixes the imaginary axis (off-diagonal entries
    /// structurally zero).
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let scale = self.entry_scale();
        self.b.abs() <= tol * scale && self.c.abs() <= tol * scale
    }

    pub fn has_zero_entry(&self) -> bool {
        let scale = self.entry_scale();
        self.entries().iter().any(|e| e.abs() < ZERO_ENTRY_TOL * scale)
    }

    /// Maximum absolute entrywise difference, taken modulo the PSL sign.
    pub fn distance_mod_sign(&self, other: &Self) -> f64 {
        let mut plus: f64 = 0.0;
        let mut minus: f64 = 0.0;
        for (p, q) in self.entries().iter().zip(other.entries()) {
            plus = plus.max((p - q).abs());
            minus = minus.max((p + q).abs());
        }
        plus.min(minus)
    }
}

/// Point-pair invariant u(z, w) = |z - w|² / (4 Im z Im w). Möbius-invariant
/// and related to hyperbolic distance by cosh ρ = 1 + 2u.
pub fn point_pair_invariant(z: Point, w: Point) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    (dx * dx + dy * dy) / (4.0 * z.y * w.y)
}

/// The (u, v) coordinates of a point: u = log|z|, v = -arctan(x/y).
pub fn angle_coords(z: Point) -> AngleCoordinates {
    AngleCoordinates {
        u: z.modulus().ln(),
        v: -(z.x / z.y).atan(),
    }
}

/// 1/cos²v(g·iy) in closed form: (a²y² + b²)(c²y² + d²) / y².
pub fn inv_cos_sq_v(g: &MoebiusElement, y: f64) -> f64 {
    let ay = g.a * y;
    let cy = g.c * y;
    (ay * ay + g.b * g.b) * (cy * cy + g.d * g.d) / (y * y)
}

/// Result of minimizing the point-pair invariant u(g·ix, iy) over both axes.
#[derive(Debug, Clone, Copy)]
pub struct AxisMinimum {
    /// inf over x, y > 0 of u(g·ix, iy); note 4·value + 2 = 2|ad+bc| in the
    /// regular case abcd > 0, and value = 0 when abcd < 0.
    pub value: f64,
    pub x: f64,
    pub y: f64,
}

/// Closed-form minimizer of u(g·ix, iy) over x, y > 0. The minimum sits at
/// x² = |bd/(ac)|, y² = |ab/(cd)| and equals (|ad| + |bc| - 1)/2.
pub fn min_u_on_axes(g: &MoebiusElement) -> Result<AxisMinimum, GeometryError> {
    if g.has_zero_entry() {
        return Err(GeometryError::DegenerateEntries);
    }
    let (a, b, c, d) = (g.a, g.b, g.c, g.d);
    let x = (b * d / (a * c)).abs().sqrt();
    let y = (a * b / (c * d)).abs().sqrt();
    let value = ((a * d).abs() + (b * c).abs() - 1.0) / 2.0;
    Ok(AxisMinimum {
        value: value.max(0.0),
        x,
        y,
    })
}

/// u(g·ix, iy) expanded in matrix entries; the quantity whose axes-minimum
/// is computed by [`min_u_on_axes`]. Equals (a²x/y + b²/(xy) + c²xy + d²y/x - 2)/4.
pub fn u_between_axes(g: &MoebiusElement, x: f64, y: f64) -> f64 {
    let (a, b, c, d) = (g.a, g.b, g.c, g.d);
    (a * a * x / y + b * b / (x * y) + c * c * x * y + d * d * y / x - 2.0) / 4.0
}
