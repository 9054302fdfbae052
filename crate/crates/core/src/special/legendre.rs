//! Legendre functions of the first kind at purely imaginary argument, and
//! the angle kernel ξ_λ built from them.
//!
//! P_{s-1}(±ix) is evaluated through the quadratic transformation of its
//! hypergeometric form (G&R 9.136), which turns the complex argument
//! (1 ∓ ix)/2 into the real negative argument -x²:
//!
//!   P_{s-1}(±ix) = D(s)·₂F₁((1-s)/2, s/2; 1/2; -x²)
//!                  ± ix·B(s)·₂F₁(1-s/2, (s+1)/2; 3/2; -x²),
//!
//! with D(s) = √π/(Γ(1-s/2)Γ((s+1)/2)) and B(s) = -2√π/(Γ((1-s)/2)Γ(s/2)).
//! The even combination P_{s-1}(ix) + P_{s-1}(-ix) = 2 D(s) ₂F₁(...; -x²)
//! is the kernel the whole spectral side runs on.

use super::gamma::recip_gamma;
use super::hyp2f1::hyp2f1;
use super::{SpecialError, SpectralParameter};
use num_complex::Complex64;

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn coef_even(s: Complex64) -> Complex64 {
    SQRT_PI * recip_gamma(1.0 - s / 2.0) * recip_gamma((s + 1.0) / 2.0)
}

fn coef_odd(s: Complex64) -> Complex64 {
    -2.0 * SQRT_PI * recip_gamma((1.0 - s) / 2.0) * recip_gamma(s / 2.0)
}

fn f_even(s: Complex64, w: Complex64) -> Result<Complex64, SpecialError> {
    hyp2f1((1.0 - s) / 2.0, s / 2.0, Complex64::new(0.5, 0.0), w)
}

fn f_odd(s: Complex64, w: Complex64) -> Result<Complex64, SpecialError> {
    hyp2f1(1.0 - s / 2.0, (s + 1.0) / 2.0, Complex64::new(1.5, 0.0), w)
}

/// (P_{s-1}(ix), P_{s-1}(-ix)) for x ≥ 0.
pub fn legendre_pair(s: Complex64, x: f64) -> Result<(Complex64, Complex64), SpecialError> {
    let w = Complex64::new(-x * x, 0.0);
    let even = coef_even(s) * f_even(s, w)?;
    let odd = coef_odd(s) * Complex64::new(0.0, x) * f_odd(s, w)?;
    Ok((even + odd, even - odd))
}

/// The even combination P_{s-1}(ix) + P_{s-1}(-ix); real for s in the
/// small-eigenvalue segment and on the critical line.
pub fn legendre_sum(s: Complex64, x: f64) -> Result<Complex64, SpecialError> {
    Ok(2.0 * coef_even(s) * f_even(s, Complex64::new(-x * x, 0.0))?)
}

/// The kernel ξ_λ(v) solving ξ'' + (λ/cos²v)ξ = 0 with ξ(0) = 1,
/// ξ'(0) = 0, for |v| < π/2. The gamma prefactors of its Legendre form
/// cancel exactly, leaving ξ_λ(v) = ₂F₁((1-s)/2, s/2; 1/2; -tan²v).
pub fn xi_lambda(lambda: f64, v: f64) -> Result<f64, SpecialError> {
    assert!(
        v.abs() < std::f64::consts::FRAC_PI_2,
        "angle out of (-π/2, π/2)"
    );
    let s = SpectralParameter::from_lambda(lambda).s();
    let t = v.tan();
    let val = f_even(s, Complex64::new(-t * t, 0.0))?;
    debug_assert!(val.im.abs() < 1e-9 * val.norm().max(1.0));
    Ok(val.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};
    use crate::special::gamma::gamma_ratio;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_zero_is_one() {
        for x in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 17.0, 100.0, 333.0, 1.0e4] {
            let (p, q) = legendre_pair(c(1.0, 0.0), x).unwrap();
            assert!((p - c(1.0, 0.0)).norm() < 1e-12, "P_0(ix) at x={x}");
            assert!((q - c(1.0, 0.0)).norm() < 1e-12, "P_0(-ix) at x={x}");
        }
    }

    #[test]
    fn pair_matches_defining_hypergeometric_at_small_x() {
        // direct G&R 8.704 evaluation is reliable while (1∓ix)/2 stays well
        // inside the continuation domain
        for s in [c(0.7, 0.0), c(0.5, 1.3), c(0.4, -0.6)] {
            for x in [0.15, 0.6, 1.1] {
                let (p, q) = legendre_pair(s, x).unwrap();
                let z_p = (c(1.0, 0.0) - c(0.0, x)) / 2.0;
                let z_q = (c(1.0, 0.0) + c(0.0, x)) / 2.0;
                let dp = hyp2f1(1.0 - s, s, c(1.0, 0.0), z_p).unwrap();
                let dq = hyp2f1(1.0 - s, s, c(1.0, 0.0), z_q).unwrap();
                assert!((p - dp).norm() < 1e-9 * dp.norm().max(1.0), "s={s} x={x}");
                assert!((q - dq).norm() < 1e-9 * dq.norm().max(1.0), "s={s} x={x}");
            }
        }
    }

    #[test]
    fn sum_is_real_and_even_in_t() {
        for t in [0.7, 3.0, 11.0] {
            for x in [0.3, 2.0, 40.0] {
                let up = legendre_sum(c(0.5, t), x).unwrap();
                let dn = legendre_sum(c(0.5, -t), x).unwrap();
                assert!(up.im.abs() < 1e-10 * up.norm().max(1.0));
                assert!((up - dn).norm() < 1e-10 * up.norm().max(1.0));
            }
        }
    }

    #[test]
    fn critical_sum_obeys_decay_bound() {
        // P_{-1/2}(ix) + P_{-1/2}(-ix) bounded for x < 1 and
        // O(x^{-1/2} log x) beyond
        let s = c(0.5, 0.0);
        for x in [0.1, 0.5, 0.9] {
            let v = legendre_sum(s, x).unwrap().norm();
            assert!(v <= 2.5, "small-x bound at {x}: {v}");
        }
        let mut fitted: f64 = 0.0;
        for x in [1.0, 10.0, 100.0, 1000.0] {
            let v = legendre_sum(s, x).unwrap().norm();
            let envelope = x.powf(-0.5) * (x.ln() + 1.0);
            fitted = fitted.max(v / envelope);
        }
        assert!(fitted < 3.0, "decay constant blew up: {fitted}");
    }

    #[test]
    fn integral_representation_8_713_3() {
        // P_ν(z) = sqrt(2/π) Γ(1/2) / (Γ(ν+1)Γ(-ν)) ∫_0^∞ cosh((ν+1/2)t)
        //          (z + cosh t)^{-1/2} dt for -1 < Re ν < 0, here ν = s-1.
        for (s, x) in [(0.5, 2.0), (0.5, 0.7), (0.3, 1.5), (0.7, 2.0), (0.6, 10.0)] {
            let s = c(s, 0.0);
            let nu = s - 1.0;
            let pref = (2.0 / std::f64::consts::PI).sqrt()
                * gamma_ratio(&[c(0.5, 0.0)], &[nu + 1.0, -nu]).unwrap();
            let quad_value = |z: Complex64| {
                let tail = integrate(
                    |t: f64| {
                        let ch = t.cosh();
                        ((nu + 0.5) * t).exp() * 0.5 * (z + ch).powc(c(-0.5, 0.0))
                            + ((-(nu + 0.5)) * t).exp() * 0.5 * (z + ch).powc(c(-0.5, 0.0))
                    },
                    0.0,
                    80.0,
                    QuadOptions::with_tol(1e-13),
                )
                .unwrap();
                pref * tail.value
            };
            let (p, q) = legendre_pair(s, x).unwrap();
            let ip = quad_value(c(0.0, x));
            let iq = quad_value(c(0.0, -x));
            assert!((p - ip).norm() < 1e-8 * p.norm().max(1.0), "s={s} x={x}");
            assert!((q - iq).norm() < 1e-8 * q.norm().max(1.0), "s={s} x={x}");
        }
    }

    #[test]
    fn xi_initial_conditions() {
        for lambda in [0.21, 4.25, 100.25] {
            assert!((xi_lambda(lambda, 0.0).unwrap() - 1.0).abs() < 1e-12);
            let h = 1e-4;
            let deriv =
                (xi_lambda(lambda, h).unwrap() - xi_lambda(lambda, -h).unwrap()) / (2.0 * h);
            assert!(deriv.abs() < 1e-7, "ξ'(0) = {deriv} at λ = {lambda}");
        }
    }

    #[test]
    fn xi_satisfies_ode_against_rk_integration() {
        // classical RK4 on ξ'' = -λ ξ / cos²v with fine fixed step
        for lambda in [4.25, 100.25] {
            let h = 2e-5;
            let mut v = 0.0;
            let mut y = 1.0f64;
            let mut dy = 0.0f64;
            let accel = |v: f64, y: f64| -lambda * y / (v.cos() * v.cos());
            let mut max_dev: f64 = 0.0;
            let mut next_check = 0.1;
            while v < 1.4 {
                let k1y = dy;
                let k1d = accel(v, y);
                let k2y = dy + 0.5 * h * k1d;
                let k2d = accel(v + 0.5 * h, y + 0.5 * h * k1y);
                let k3y = dy + 0.5 * h * k2d;
                let k3d = accel(v + 0.5 * h, y + 0.5 * h * k2y);
                let k4y = dy + h * k3d;
                let k4d = accel(v + h, y + h * k3y);
                y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                dy += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
                v += h;
                if v >= next_check {
                    let closed = xi_lambda(lambda, v).unwrap();
                    max_dev = max_dev.max((closed - y).abs());
                    next_check += 0.1;
                }
            }
            assert!(max_dev < 1e-6, "λ={lambda}: max deviation {max_dev}");
        }
    }
}
