//! Complex special functions: gamma, Gauss and generalized hypergeometric
//! functions with analytic continuation, and Legendre functions of purely
//! imaginary argument, together with the spectral-parameter bookkeeping
//! (s, t, λ) used throughout the spectral side.

use num_complex::Complex64;
use thiserror::Error;

pub mod gamma;
pub mod hyp2f1;
pub mod legendre;
pub mod pfq;

pub use gamma::{gamma as gamma_fn, gamma_ratio, log_gamma, recip_gamma};
pub use hyp2f1::hyp2f1;
pub use legendre::{legendre_pair, legendre_sum, xi_lambda};
pub use pfq::{connect_3f2_large_argument, hyp_pfq, ConnectionSummand};

#[derive(Debug, Error)]
pub enum SpecialError {
    #[error("gamma pole at nonpositive integer argument {0}")]
    PoleAtNonpositiveInteger(Complex64),
    #[error("parameter pole: {0}")]
    ParameterPole(String),
    #[error("argument within 1e-3 of the branch cut [1, ∞); accuracy degraded")]
    NearCutDegradation(Complex64),
    #[error("degenerate parameters for connection formula: {0}")]
    DegenerateParameters(String),
    #[error("series diverges: {0}")]
    Divergent(String),
    #[error("analytic continuation failed: {0}")]
    ContinuationFailure(String),
}

/// Spectral parameter triple s = 1/2 + it, λ = s(1-s) = 1/4 + t².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    s: Complex64,
    t: Complex64,
    lambda: Complex64,
}

impl SpectralParameter {
    pub fn from_s(s: Complex64) -> Self {
        let t = (s - 0.5) * Complex64::new(0.0, -1.0);
        SpectralParameter {
            s,
            t,
            lambda: s * (1.0 - s),
        }
    }

    pub fn from_t(t: Complex64) -> Self {
        let s = Complex64::new(0.5, 0.0) + Complex64::new(0.0, 1.0) * t;
        SpectralParameter {
            s,
            t,
            lambda: s * (1.0 - s),
        }
    }

    pub fn from_real_t(t: f64) -> Self {
        Self::from_t(Complex64::new(t, 0.0))
    }

    /// Real eigenvalue λ; yields s on the segment (1/2, 1] for λ < 1/4 and
    /// on the critical line otherwise.
    pub fn from_lambda(lambda: f64) -> Self {
        let disc = 0.25 - lambda;
        let s = if disc >= 0.0 {
            Complex64::new(0.5 + disc.sqrt(), 0.0)
        } else {
            Complex64::new(0.5, (-disc).sqrt())
        };
        Self::from_s(s)
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// True for the small-eigenvalue range: s real in (1/2, 1].
    pub fn is_small_eigenvalue(&self) -> bool {
        self.s.im.abs() < 1e-12 && self.s.re > 0.5 && self.s.re <= 1.0 + 1e-12
    }

    /// Consistency defect |s(1-s) - (1/4 + t²)|, zero up to rounding.
    pub fn consistency_defect(&self) -> f64 {
        (self.lambda - (Complex64::new(0.25, 0.0) + self.t * self.t)).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_parameter_consistency() {
        for sp in [
            SpectralParameter::from_s(Complex64::new(0.75, 0.0)),
            SpectralParameter::from_real_t(3.2),
            SpectralParameter::from_lambda(0.21),
            SpectralParameter::from_lambda(4.25),
            SpectralParameter::from_s(Complex64::new(1.0, 0.0)),
        ] {
            assert!(sp.consistency_defect() < 1e-12, "{sp:?}");
        }
        assert!(SpectralParameter::from_s(Complex64::new(0.75, 0.0)).is_small_eigenvalue());
        assert!(SpectralParameter::from_s(Complex64::new(1.0, 0.0)).is_small_eigenvalue());
        assert!(!SpectralParameter::from_real_t(2.0).is_small_eigenvalue());
        // s = 1 corresponds to t = -i/2
        let sp = SpectralParameter::from_s(Complex64::new(1.0, 0.0));
        assert!((sp.t() - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        // λ = 1/4 + t²
        let sp = SpectralParameter::from_lambda(4.25);
        assert!((sp.t() - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }
}
