//! Smoothed indicators for the counting threshold: a piecewise-linear
//! profile g over the squared variable, its Weyl-inverted test function f,
//! and the resulting geometric-side weights q (regular range) and q̃
//! (exceptional range).
//!
//! The plus family overestimates the sharp cutoff at X and is supported up
//! to (X+Y)²; the minus family underestimates it and is supported up to X².
//! Writing H = Y² + 2XY, a = √(X²-1), A = √((X+Y)²-1), T = √(X²-H-1):
//!
//!   f⁺(x²+1) = (2/πH)·x·(√(A²-x²) - √(a²-x²))  for x ≤ a,
//!              (2/πH)·x·√(A²-x²)               for a ≤ x ≤ A, else 0,
//!
//! and the minus family is the same shape with (A, a) replaced by (a, T).
//! The geometric weights recover the profile: q(z) = g(z²) for z > 1, while
//! q̃(z) for 0 ≤ z ≤ 1 is a regular integral of f against an inverse
//! square root.

use crate::quad::{integrate_with_breakpoints, QuadError, QuadOptions};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TestFnError {
    #[error("inadmissible indicator: {0}")]
    Inadmissible(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// The (X, Y, sign) triple with its derived support radii.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedIndicator {
    x: f64,
    y: f64,
    sign: Sign,
    h: f64,
    a_lo: f64,
    a_hi: f64,
    t_cut: Option<f64>,
}

impl SmoothedIndicator {
    /// Builds the indicator; `y = None` selects the balanced default
    /// Y = X^(2/3). The minus family requires H < X² - 1 so that its inner
    /// radius T is real.
    pub fn new(x: f64, y: Option<f64>, sign: Sign) -> Result<Self, TestFnError> {
        if !(x > 2.0) {
            return Err(TestFnError::Inadmissible(format!(
                "threshold X must exceed 2, got {x}"
            )));
        }
        let y = y.unwrap_or_else(|| x.powf(2.0 / 3.0));
        if !(y > 0.0 && y <= x) {
            return Err(TestFnError::Inadmissible(format!(
                "smoothing width must lie in (0, X], got Y = {y}"
            )));
        }
        let h = y * y + 2.0 * x * y;
        let t_cut = match sign {
            Sign::Plus => None,
            Sign::Minus => {
                let t2 = x * x - h - 1.0;
                if t2 <= 0.0 {
                    return Err(TestFnError::Inadmissible(format!(
                        "minus family needs H < X² - 1; X = {x}, Y = {y} gives H = {h}"
                    )));
                }
                Some(t2.sqrt())
            }
        };
        Ok(SmoothedIndicator {
            x,
            y,
            sign,
            h,
            a_lo: (x * x - 1.0).sqrt(),
            a_hi: ((x + y) * (x + y) - 1.0).sqrt(),
            t_cut,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// H = Y² + 2XY; also equals the difference of squared support radii.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// a = √(X²-1).
    pub fn inner_radius(&self) -> f64 {
        self.a_lo
    }

    /// A = √((X+Y)²-1).
    pub fn outer_radius(&self) -> f64 {
        self.a_hi
    }

    /// T = √(X²-H-1), minus family only.
    pub fn cut_radius(&self) -> Option<f64> {
        self.t_cut
    }

    /// Radius beyond which f vanishes identically.
    pub fn support_radius(&self) -> f64 {
        match self.sign {
            Sign::Plus => self.a_hi,
            Sign::Minus => self.a_lo,
        }
    }

    /// Branch joints of f, for quadrature breakpoints.
    pub fn corner_points(&self) -> Vec<f64> {
        match self.sign {
            Sign::Plus => vec![self.a_lo, self.a_hi],
            Sign::Minus => vec![self.t_cut.unwrap(), self.a_lo],
        }
    }

    /// The profile g evaluated on the squared variable.
    pub fn g(&self, v: f64) -> f64 {
        let x2 = self.x * self.x;
        match self.sign {
            Sign::Plus => {
                let top = (self.x + self.y) * (self.x + self.y);
                if v <= x2 {
                    1.0
                } else if v >= top {
                    0.0
                } else {
                    (top - v) / self.h
                }
            }
            Sign::Minus => {
                if v <= x2 - self.h {
                    1.0
                } else if v >= x2 {
                    0.0
                } else {
                    (x2 - v) / self.h
                }
            }
        }
    }

    /// The test function as x ↦ f(x² + 1).
    pub fn f(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let scale = 2.0 / (std::f64::consts::PI * self.h) * x;
        let sq = |r: f64, x: f64| (r * r - x * x).max(0.0).sqrt();
        match self.sign {
            Sign::Plus => {
                if x >= self.a_hi {
                    0.0
                } else if x >= self.a_lo {
                    scale * sq(self.a_hi, x)
                } else {
                    scale * (sq(self.a_hi, x) - sq(self.a_lo, x))
                }
            }
            Sign::Minus => {
                let t = self.t_cut.unwrap();
                if x >= self.a_lo {
                    0.0
                } else if x >= t {
                    scale * sq(self.a_lo, x)
                } else {
                    scale * (sq(self.a_lo, x) - sq(t, x))
                }
            }
        }
    }

    /// Geometric weight for the regular range z > 1; closed form g(z²).
    pub fn q(&self, z: f64) -> f64 {
        assert!(z > 1.0, "regular weight needs z > 1");
        self.g(z * z)
    }

    /// The defining integral of q by quadrature:
    /// 2∫ f(x²+1)/√(x²-(z²-1)) dx over x ≥ √(z²-1), with the substitution
    /// x = √(z²-1)·cosh r flattening the endpoint.
    pub fn q_quadrature(&self, z: f64, tol: f64) -> Result<f64, TestFnError> {
        assert!(z > 1.0);
        let beta = (z * z - 1.0).sqrt();
        let sup = self.support_radius();
        if beta >= sup {
            return Ok(0.0);
        }
        let r_max = (sup / beta).acosh();
        let corners: Vec<f64> = self
            .corner_points()
            .iter()
            .filter(|&&c| c > beta)
            .map(|&c| (c / beta).acosh())
            .collect();
        let out = integrate_with_breakpoints(
            |r: f64| self.f(beta * r.cosh()),
            0.0,
            r_max,
            &corners,
            QuadOptions::with_tol(tol),
        )?;
        Ok(2.0 * out.value)
    }

    /// Exceptional-range weight q̃(z) for 0 ≤ z ≤ 1, by adaptive quadrature
    /// of 2 f(x²+1)/√(x² + (1-z²)).
    pub fn q_tilde(&self, z: f64, tol: f64) -> Result<f64, TestFnError> {
        assert!((0.0..=1.0).contains(&z), "exceptional weight needs z in [0,1]");
        let gap = 1.0 - z * z;
        let sup = self.support_radius();
        let out = integrate_with_breakpoints(
            |x: f64| {
                if x == 0.0 {
                    // f(x)/x limit exists; the quadrature nodes are interior
                    0.0
                } else {
                    self.f(x) / (x * x + gap).sqrt()
                }
            },
            0.0,
            sup,
            &self.corner_points(),
            QuadOptions::with_tol(tol),
        )?;
        Ok(2.0 * out.value)
    }

    /// Alternate quadrature scheme for q̃ via x = √(1-z²)·sinh u; only for
    /// z strictly below 1.
    pub fn q_tilde_alt(&self, z: f64, tol: f64) -> Result<f64, TestFnError> {
        assert!((0.0..1.0).contains(&z));
        let g = (1.0 - z * z).sqrt();
        let sup = self.support_radius();
        let u_max = (sup / g).asinh();
        let corners: Vec<f64> = self
            .corner_points()
            .iter()
            .map(|&c| (c / g).asinh())
            .collect();
        let out = integrate_with_breakpoints(
            |u: f64| self.f(g * u.sinh()),
            0.0,
            u_max,
            &corners,
            QuadOptions::with_tol(tol),
        )?;
        Ok(2.0 * out.value)
    }
}
