//! The Huber transform d_t(f): the spectral-side pairing of a test function
//! with a spectral parameter. Three routes are provided:
//!
//! 1. `huber_numeric`: quadrature of f(x²+1) against the angle kernel on
//!    [0, ∞). The Γ prefactor of the Legendre form cancels against the
//!    normalization of the kernel, so the integrand is simply
//!    f(x²+1)·₂F₁((1-s)/2, s/2; 1/2; -x²) — stable for arbitrarily large t.
//! 2. `huber_closed`: for the smoothed indicators, the transform reduces to
//!    a difference of moments J_s evaluated through the ₃F₂ re-expansion at
//!    large argument.
//! 3. `two_term_expansion`: the small-eigenvalue asymptotic form
//!    (γ₁(s)/π)X^s + (γ₂(s)/π)((3-s)/2)X^{1-s}, with envelope
//!    O(X^{s-1}Y + X^{-s}Y + Y).

use crate::quad::{
    integrate_decaying, integrate_with_breakpoints, oscillation_breakpoints, QuadError,
    QuadOptions, QuadOutcome,
};
use crate::special::gamma::{gamma_ratio, is_nonpositive_integer, log_gamma, recip_gamma};
use crate::special::hyp2f1::hyp2f1;
use crate::special::legendre::xi_lambda;
use crate::special::pfq::eval_pfq_continued;
use crate::special::{SpecialError, SpectralParameter};
use crate::testfn::{Sign, SmoothedIndicator};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HuberError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error("v-form cross-check needs a real eigenvalue, got λ = {0}")]
    ComplexEigenvalue(Complex64),
    #[error("expansion undefined: gamma factor has a pole at s = {0}")]
    FactorPole(Complex64),
}

/// The angle kernel ₂F₁((1-s)/2, s/2; 1/2; -x²); equals ξ_λ(arctan x) and
/// carries the whole s-dependence of the transform.
pub fn angle_kernel(s: Complex64, x: f64) -> Result<Complex64, SpecialError> {
    hyp2f1(
        (1.0 - s) / 2.0,
        s / 2.0,
        Complex64::new(0.5, 0.0),
        Complex64::new(-x * x, 0.0),
    )
}

fn quad_options(tol: f64) -> QuadOptions {
    QuadOptions {
        abs_tol: tol,
        rel_tol: tol,
        max_intervals: 30_000,
    }
}

fn kernel_breakpoints(sp: &SpectralParameter, corners: &[f64], hi: f64) -> Vec<f64> {
    let sqrt_lambda = sp.lambda().norm().sqrt();
    let mut pts = oscillation_breakpoints(sqrt_lambda, 0.0, hi);
    pts.extend(corners.iter().copied().filter(|&x| x > 0.0 && x < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// d_t(f) for a smoothed indicator, by adaptive quadrature with panels
/// aligned to the kernel oscillation and breakpoints at the indicator
/// corners.
pub fn huber_numeric(
    ind: &SmoothedIndicator,
    sp: &SpectralParameter,
    tol: f64,
) -> Result<Complex64, HuberError> {
    let s = sp.s();
    let hi = ind.support_radius();
    let pts = kernel_breakpoints(sp, &ind.corner_points(), hi);
    let mut kernel_err: Option<SpecialError> = None;
    let out: QuadOutcome<Complex64> = integrate_with_breakpoints(
        |x| match angle_kernel(s, x) {
            Ok(k) => k * ind.f(x),
            Err(e) => {
                kernel_err = Some(e);
                Complex64::new(f64::NAN, 0.0)
            }
        },
        0.0,
        hi,
        &pts,
        quad_options(tol),
    )?;
    if let Some(e) = kernel_err {
        return Err(e.into());
    }
    Ok(out.value)
}

/// d_t(f) for an arbitrary test function given as f(x²+1) ↦ value, with
/// either a compact support radius or a decaying tail.
pub fn huber_numeric_fn(
    f: impl Fn(f64) -> f64,
    support_radius: Option<f64>,
    sp: &SpectralParameter,
    tol: f64,
) -> Result<Complex64, HuberError> {
    let s = sp.s();
    let mut kernel_err: Option<SpecialError> = None;
    let mut integrand = |x: f64| match angle_kernel(s, x) {
        Ok(k) => k * f(x * x + 1.0),
        Err(e) => {
            kernel_err = Some(e);
            Complex64::new(f64::NAN, 0.0)
        }
    };
    let out = match support_radius {
        Some(hi) => {
            let pts = kernel_breakpoints(sp, &[], hi);
            integrate_with_breakpoints(&mut integrand, 0.0, hi, &pts, quad_options(tol))?
        }
        None => integrate_decaying(&mut integrand, 0.0, quad_options(tol))?,
    };
    if let Some(e) = kernel_err {
        return Err(e.into());
    }
    Ok(out.value)
}

/// Cross-check form of the transform in the angle variable:
/// ∫ f(1/cos²v) ξ_λ(v) / cos²v dv over (0, π/2). Real eigenvalues only.
pub fn huber_numeric_vform(
    ind: &SmoothedIndicator,
    sp: &SpectralParameter,
    tol: f64,
) -> Result<f64, HuberError> {
    let lambda = sp.lambda();
    if lambda.im.abs() > 1e-12 {
        return Err(HuberError::ComplexEigenvalue(lambda));
    }
    let hi = ind.support_radius();
    let v_max = (1.0 / (hi * hi + 1.0).sqrt()).acos();
    let corners: Vec<f64> = ind
        .corner_points()
        .iter()
        .map(|&x| x.atan())
        .collect();
    let mut kernel_err: Option<SpecialError> = None;
    // f is stored as x ↦ f(x²+1) and 1/cos²v = tan²v + 1, so the integrand
    // only needs f at x = tan v
    let out: QuadOutcome<f64> = integrate_with_breakpoints(
        |v| {
            let c2 = v.cos() * v.cos();
            match xi_lambda(lambda.re, v) {
                Ok(xi) => ind.f(v.tan()) * xi / c2,
                Err(e) => {
                    kernel_err = Some(e);
                    f64::NAN
                }
            }
        },
        0.0,
        v_max,
        &corners,
        quad_options(tol),
    )?;
    if let Some(e) = kernel_err {
        return Err(e.into());
    }
    Ok(out.value)
}

/// Γ-free moment ∫₀^√y x√(y-x²)·kernel dx: J_s(y) divided by the Legendre
/// sum normalization 2D(s).
fn moment_quadrature(
    s: Complex64,
    sp: &SpectralParameter,
    y: f64,
    tol: f64,
) -> Result<Complex64, HuberError> {
    let r = y.sqrt();
    // x = r sin θ removes the square-root endpoint
    let sqrt_lambda = sp.lambda().norm().sqrt();
    let mut pts: Vec<f64> = oscillation_breakpoints(sqrt_lambda, 0.0, r)
        .into_iter()
        .map(|x| (x / r).asin())
        .collect();
    pts.dedup();
    let mut kernel_err: Option<SpecialError> = None;
    let out = integrate_with_breakpoints(
        |th: f64| {
            let (sn, cs) = th.sin_cos();
            match angle_kernel(s, r * sn) {
                Ok(k) => k * (r * r * r * sn * cs * cs),
                Err(e) => {
                    kernel_err = Some(e);
                    Complex64::new(f64::NAN, 0.0)
                }
            }
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        &pts,
        quad_options(tol),
    )?;
    if let Some(e) = kernel_err {
        return Err(e.into());
    }
    Ok(out.value)
}

fn moment_transformed(s: Complex64, y: f64) -> Result<Complex64, SpecialError> {
    // (1/3) y^{3/2} ₃F₂((1-s)/2, s/2, 1; 1/2, 5/2; -y)
    let al = [(1.0 - s) / 2.0, s / 2.0, Complex64::new(1.0, 0.0)];
    let be = [Complex64::new(0.5, 0.0), Complex64::new(2.5, 0.0)];
    let f = eval_pfq_continued(&al, &be, Complex64::new(-y, 0.0))?;
    Ok(f * y.powf(1.5) / 3.0)
}

/// Route selector for [`j_s`] and [`huber_closed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JRoute {
    Quadrature,
    Transformed,
    Auto,
}

/// J_s(y) = ∫₀^√y x √(y-x²) (P_{s-1}(ix) + P_{s-1}(-ix)) dx, by direct
/// quadrature or through the ₃F₂ large-argument re-expansion. The
/// transformed route degenerates at s ∈ {1/2, 1} and falls back to
/// quadrature under `Auto`.
pub fn j_s(sp: &SpectralParameter, y: f64, route: JRoute) -> Result<Complex64, HuberError> {
    assert!(y > 0.0, "moment argument must be positive");
    let s = sp.s();
    let norm = 2.0
        * std::f64::consts::PI.sqrt()
        * recip_gamma(1.0 - s / 2.0)
        * recip_gamma((s + 1.0) / 2.0);
    match route {
        JRoute::Quadrature => Ok(norm * moment_quadrature(s, sp, y, 1e-10)?),
        JRoute::Transformed => Ok(norm * moment_transformed(s, y)?),
        JRoute::Auto => {
            if near_degenerate_s(s) {
                return Ok(norm * moment_quadrature(s, sp, y, 1e-10)?);
            }
            match moment_transformed(s, y) {
                Ok(m) => Ok(norm * m),
                Err(SpecialError::DegenerateParameters(_)) => {
                    Ok(norm * moment_perturbed(s, y)?)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// Transformed-route values near a parameter degeneracy: average of the two
/// evaluations at s ± ε(1+i).
fn moment_perturbed(s: Complex64, y: f64) -> Result<Complex64, SpecialError> {
    let eps = Complex64::new(1e-6, 1e-6);
    let up = moment_transformed(s + eps, y)?;
    let dn = moment_transformed(s - eps, y)?;
    Ok((up + dn) * 0.5)
}

fn near_degenerate_s(s: Complex64) -> bool {
    (s - Complex64::new(0.5, 0.0)).norm() < 1e-4 || (s - Complex64::new(1.0, 0.0)).norm() < 1e-4
}

/// Closed-form Huber transform of a smoothed indicator:
/// d_t = (2/π)·(moment(hi²) - moment(lo²))/H where (hi, lo) are the outer
/// and inner support radii. Near the degenerate spectral points the
/// quadrature route is used instead.
pub fn huber_closed(
    ind: &SmoothedIndicator,
    sp: &SpectralParameter,
) -> Result<Complex64, HuberError> {
    let s = sp.s();
    if near_degenerate_s(s) {
        return huber_numeric(ind, sp, 1e-10);
    }
    let (hi, lo) = match ind.sign() {
        Sign::Plus => (ind.outer_radius(), ind.inner_radius()),
        Sign::Minus => (ind.inner_radius(), ind.cut_radius().expect("minus admissible")),
    };
    let eval = |ss: Complex64| -> Result<Complex64, SpecialError> {
        Ok(moment_transformed(ss, hi * hi)? - moment_transformed(ss, lo * lo)?)
    };
    let diff = match eval(s) {
        Ok(d) => d,
        Err(SpecialError::DegenerateParameters(_)) => {
            let eps = Complex64::new(1e-6, 1e-6);
            (eval(s + eps)? + eval(s - eps)?) * 0.5
        }
        Err(e) => return Err(e.into()),
    };
    Ok(diff * (2.0 / std::f64::consts::PI) / ind.h())
}

/// The three Γ-factor coefficients of the moment re-expansion. A `None`
/// records a parameter pole for that factor.
#[derive(Debug, Clone, Copy)]
pub struct GammaFactors {
    pub gamma1: Option<Complex64>,
    pub gamma2: Option<Complex64>,
    pub gamma3: Option<Complex64>,
}

pub fn gamma_factors(s: Complex64) -> GammaFactors {
    let gamma1 = (|| {
        let rational = s * (2.0 * s - 1.0);
        if rational.norm() < 1e-12 {
            return None;
        }
        let num = log_gamma(s + 0.5).ok()? + log_gamma((s + 1.0) / 2.0).ok()?;
        let r3 = recip_gamma(s / 2.0);
        Some(std::f64::consts::PI / 2.0 * num.exp() * r3 * r3 * r3 * 4.0 / rational)
    })();
    let gamma2 = (|| {
        let num = gamma_ratio(
            &[(1.0 - 2.0 * s) / 2.0, (2.0 - s) / 2.0],
            &[(1.0 - s) / 2.0, (1.0 - s) / 2.0, (5.0 - s) / 2.0],
        )
        .ok()?;
        Some(std::f64::consts::PI / 2.0 * num)
    })();
    let gamma3 = (|| {
        // reduced from -(1/2)Γ((-1-s)/2)Γ((s-2)/2)/(Γ((1-s)/2)Γ(s/2)) via
        // Γ(w) = Γ(w+1)/w at w = (-1-s)/2, removing the spurious pole at s=1
        if (s + 1.0).norm() < 1e-12 || is_nonpositive_integer((s - 2.0) / 2.0).is_some() {
            return None;
        }
        let r = gamma_ratio(&[(s - 2.0) / 2.0], &[s / 2.0]).ok()?;
        Some(r / (1.0 + s))
    })();
    GammaFactors {
        gamma1,
        gamma2,
        gamma3,
    }
}

/// Two-term small-eigenvalue expansion
/// (γ₁(s)/π) X^s + (γ₂(s)/π)((3-s)/2) X^{1-s}.
pub fn two_term_expansion(x: f64, s: Complex64) -> Result<Complex64, HuberError> {
    let gf = gamma_factors(s);
    let g1 = gf.gamma1.ok_or(HuberError::FactorPole(s))?;
    let g2 = gf.gamma2.ok_or(HuberError::FactorPole(s))?;
    let xs = Complex64::new(x, 0.0).powc(s);
    let x1s = Complex64::new(x, 0.0).powc(1.0 - s);
    Ok(g1 / std::f64::consts::PI * xs
        + g2 / std::f64::consts::PI * (3.0 - s) / 2.0 * x1s)
}

/// Size of the error envelope X^{s-1}Y + X^{-s}Y + Y of the two-term form.
pub fn expansion_envelope(x: f64, y: f64, s_re: f64) -> f64 {
    x.powf(s_re - 1.0) * y + x.powf(-s_re) * y + y
}

/// Oscillatory decomposition at real t into a·X^{1/2+it} + b·X^{1/2-it}
/// plus a remainder, with the explicit slowly-varying coefficients from the
/// leading moments.
#[derive(Debug, Clone, Copy)]
pub struct HuberDecomposition {
    pub a_coef: Complex64,
    pub b_coef: Complex64,
    pub leading: Complex64,
    pub reflected: Complex64,
    pub remainder: Complex64,
}

pub fn decomposition(
    ind: &SmoothedIndicator,
    t: f64,
) -> Result<HuberDecomposition, HuberError> {
    let sp = SpectralParameter::from_real_t(t);
    let s = sp.s();
    let x = ind.x();
    let y = ind.y();
    let gf = gamma_factors(s);
    let g1 = gf.gamma1.ok_or(HuberError::FactorPole(s))?;
    let g2 = gf.gamma2.ok_or(HuberError::FactorPole(s))?;
    let ramp = y * y / (x * x) + 2.0 * y / x;
    let growth = Complex64::new(1.0 + y / x, 0.0);
    let a_coef = g1 / std::f64::consts::PI * 2.0 / (s + 2.0) * (growth.powc(s + 2.0) - 1.0) / ramp;
    let b_coef = g2 / std::f64::consts::PI * (growth.powc(3.0 - s) - 1.0) / ramp;
    let xs = Complex64::new(x, 0.0).powc(s);
    let x1s = Complex64::new(x, 0.0).powc(1.0 - s);
    let exact = huber_closed(ind, &sp)?;
    let leading = a_coef * xs;
    let reflected = b_coef * x1s;
    Ok(HuberDecomposition {
        a_coef,
        b_coef,
        leading,
        reflected,
        remainder: exact - leading - reflected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp_s(re: f64, im: f64) -> SpectralParameter {
        SpectralParameter::from_s(Complex64::new(re, im))
    }

    fn indicator(x: f64) -> SmoothedIndicator {
        SmoothedIndicator::new(x, None, Sign::Plus).unwrap()
    }

    #[test]
    fn closed_route_matches_quadrature() {
        for (re, im) in [(0.6, 0.0), (0.9, 0.0), (0.5, 2.0), (0.5, 10.0)] {
            for x in [25.0, 100.0] {
                let ind = indicator(x);
                let sp = sp_s(re, im);
                let dn = huber_numeric(&ind, &sp, 1e-10).unwrap();
                let dc = huber_closed(&ind, &sp).unwrap();
                assert!(
                    (dn - dc).norm() < 1e-6 * dn.norm().max(1e-12),
                    "s = {re}+{im}i, X = {x}: {dn} vs {dc}"
                );
            }
        }
    }

    #[test]
    fn closed_route_matches_quadrature_for_minus_family() {
        let ind = SmoothedIndicator::new(25.0, None, Sign::Minus).unwrap();
        for sp in [sp_s(0.75, 0.0), sp_s(0.5, 2.0)] {
            let dn = huber_numeric(&ind, &sp, 1e-10).unwrap();
            let dc = huber_closed(&ind, &sp).unwrap();
            assert!(
                (dn - dc).norm() < 1e-6 * dn.norm().max(1e-12),
                "{sp:?}: {dn} vs {dc}"
            );
        }
    }

    #[test]
    fn vform_cross_check() {
        let ind = indicator(25.0);
        for sp in [sp_s(0.75, 0.0), SpectralParameter::from_real_t(2.0)] {
            let xform = huber_numeric(&ind, &sp, 1e-10).unwrap();
            let vform = huber_numeric_vform(&ind, &sp, 1e-10).unwrap();
            assert!(
                (xform.re - vform).abs() < 1e-7 * xform.norm().max(1.0),
                "{sp:?}"
            );
        }
    }

    #[test]
    fn degree_one_moment_closed_form() {
        // at s = 1 the kernel is 1, so J₁(y) = (2/3) y^{3/2}
        let sp = sp_s(1.0, 0.0);
        for y in [2.0, 50.0, 1234.5] {
            let j = j_s(&sp, y, JRoute::Quadrature).unwrap();
            let exact = 2.0 / 3.0 * y.powf(1.5);
            assert!((j.re - exact).abs() < 1e-8 * exact, "y = {y}");
            assert!(j.im.abs() < 1e-10 * exact);
        }
    }

    #[test]
    fn moment_routes_agree() {
        let sp = sp_s(0.75, 0.0);
        let x: f64 = 50.0;
        let y = x.powf(2.0 / 3.0);
        let a2 = (x + y) * (x + y) - 1.0;
        let q = j_s(&sp, a2, JRoute::Quadrature).unwrap();
        let t = j_s(&sp, a2, JRoute::Transformed).unwrap();
        assert!((q - t).norm() < 1e-6 * q.norm(), "{q} vs {t}");
    }

    #[test]
    fn transform_at_unit_spectral_point() {
        let x: f64 = 100.0;
        let y = x.powf(2.0 / 3.0);
        let ind = SmoothedIndicator::new(x, Some(y), Sign::Plus).unwrap();
        let d = huber_closed(&ind, &sp_s(1.0, 0.0)).unwrap();
        assert!(d.im.abs() < 1e-10);
        assert!((d.re - x / std::f64::consts::PI).abs() <= y);
        assert!((d.re - 2.0 * x / std::f64::consts::PI).abs() <= 2.0 * y);
        // exact value: (2/(3π)) (A³ - a³)/H
        let a = (x * x - 1.0).sqrt();
        let big_a = ((x + y) * (x + y) - 1.0).sqrt();
        let h = y * y + 2.0 * x * y;
        let exact = 2.0 / (3.0 * std::f64::consts::PI) * (big_a.powi(3) - a.powi(3)) / h;
        assert!((d.re - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn evenness_in_t() {
        let ind = indicator(50.0);
        let up = huber_numeric(&ind, &SpectralParameter::from_real_t(3.7), 1e-10).unwrap();
        let dn = huber_numeric(&ind, &SpectralParameter::from_real_t(-3.7), 1e-10).unwrap();
        assert!((up - dn).norm() < 1e-9);
    }

    #[test]
    fn gamma_factor_values() {
        let gf = gamma_factors(Complex64::new(1.0, 0.0));
        let g1 = gf.gamma1.unwrap();
        assert!((g1 - Complex64::new(1.0, 0.0)).norm() < 1e-12, "γ₁(1) = {g1}");
        let g2 = gf.gamma2.unwrap();
        assert!(g2.norm() < 1e-12, "γ₂(1) = {g2}");
        let g3 = gf.gamma3.unwrap();
        assert!((g3 - Complex64::new(-1.0, 0.0)).norm() < 1e-12, "γ₃(1) = {g3}");
        // pole at s = 1/2 for γ₁ (rational factor) and γ₂ (Γ(0))
        let gf = gamma_factors(Complex64::new(0.5, 0.0));
        assert!(gf.gamma1.is_none());
        assert!(gf.gamma2.is_none());
    }

    #[test]
    fn gamma_factor_decay_products() {
        let powers = [0.5, 1.5, 2.0];
        let mut worst = [0.0f64; 3];
        for k in 0..=20 {
            let t = 10.0 * 10f64.powf(k as f64 * 3.0 / 20.0); // 10..10^4
            let gf = gamma_factors(Complex64::new(0.5, t));
            let vals = [
                gf.gamma1.unwrap().norm(),
                gf.gamma2.unwrap().norm(),
                gf.gamma3.unwrap().norm(),
            ];
            for i in 0..3 {
                worst[i] = worst[i].max(vals[i] * t.powf(powers[i]));
            }
        }
        for (i, w) in worst.iter().enumerate() {
            assert!(*w < 10.0, "decay product {i} unbounded: {w}");
        }
    }

    #[test]
    fn critical_line_bound() {
        // |d_t(f⁺)| ≤ C X^{1/2} min(t^{-1/2}, t^{-3/2} X/Y) with stable C
        let mut cs = Vec::new();
        for x in [25.0f64, 50.0, 100.0] {
            let y = x.powf(2.0 / 3.0);
            let ind = SmoothedIndicator::new(x, Some(y), Sign::Plus).unwrap();
            let mut c_here: f64 = 0.0;
            for t in [2.0, 8.0, 32.0] {
                let d = huber_closed(&ind, &SpectralParameter::from_real_t(t)).unwrap();
                let bound = x.sqrt() * (t.powf(-0.5)).min(t.powf(-1.5) * x / y);
                c_here = c_here.max(d.norm() / bound);
            }
            cs.push(c_here.max(1e-12));
        }
        let slope = (cs[2] / cs[0]).ln() / 4.0f64.ln();
        assert!(slope < 0.1, "fitted constant grows: slope {slope}, {cs:?}");
    }

    #[test]
    fn central_bound_with_log() {
        // t = 0: |d_0| ≤ C sqrt(X) log X with flat C
        let mut cs = Vec::new();
        for x in [25.0f64, 50.0, 100.0, 200.0] {
            let y = x.powf(2.0 / 3.0);
            let ind = SmoothedIndicator::new(x, Some(y), Sign::Plus).unwrap();
            let d = huber_numeric(&ind, &SpectralParameter::from_real_t(0.0), 1e-9).unwrap();
            cs.push(d.norm() / (x.sqrt() * x.ln()));
        }
        let slope = (cs[3] / cs[0]).ln() / 8.0f64.ln();
        assert!(slope < 0.1, "central constant grows: {cs:?}");
    }

    #[test]
    fn mean_value_moment_point_lies_in_band() {
        // there is ξ in [a², A²] with d_t = (1/π)·m'(ξ) where
        // m'(y) = ∫ x/sqrt(y-x²)·kernel dx; solve for ξ by bisection
        for sp in [sp_s(0.6, 0.0), sp_s(0.5, 2.0)] {
            let x: f64 = 25.0;
            let y = x.powf(2.0 / 3.0);
            let ind = SmoothedIndicator::new(x, Some(y), Sign::Plus).unwrap();
            let d = huber_closed(&ind, &sp).unwrap().re;
            let s = sp.s();
            let deriv = |xi: f64| -> f64 {
                let r = xi.sqrt();
                // u = sqrt(xi - x²) removes the endpoint singularity
                let out = integrate_with_breakpoints(
                    |u: f64| {
                        let xx = (xi - u * u).max(0.0).sqrt();
                        angle_kernel(s, xx).unwrap()
                    },
                    0.0,
                    r,
                    &[],
                    quad_options(1e-10),
                )
                .unwrap();
                out.value.re / std::f64::consts::PI
            };
            let (lo, hi) = (x * x - 1.0, (x + y) * (x + y) - 1.0);
            let (mut flo, fhi) = (deriv(lo) - d, deriv(hi) - d);
            assert!(
                flo.signum() != fhi.signum(),
                "mean-value point escapes the band: {flo} {fhi}"
            );
            let (mut a, mut b) = (lo, hi);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = deriv(mid) - d;
                if fm.signum() == flo.signum() {
                    a = mid;
                    flo = fm;
                } else {
                    b = mid;
                }
            }
            let xi = 0.5 * (a + b);
            assert!(xi >= lo - 1e-6 && xi <= hi + 1e-6);
        }
    }

    #[test]
    fn two_term_expansion_inside_envelope() {
        for s_re in [0.6, 0.75, 0.9] {
            let mut cs = Vec::new();
            for x in [25.0f64, 100.0] {
                let y = x.powf(2.0 / 3.0);
                let ind = SmoothedIndicator::new(x, Some(y), Sign::Plus).unwrap();
                let sp = sp_s(s_re, 0.0);
                let exact = huber_closed(&ind, &sp).unwrap();
                let approx = two_term_expansion(x, sp.s()).unwrap();
                let env = expansion_envelope(x, y, s_re);
                cs.push((exact - approx).norm() / env);
            }
            assert!(
                cs[1] / cs[0] < 2.0 && cs[0] / cs[1] < 2.0,
                "envelope constant unstable at s = {s_re}: {cs:?}"
            );
        }
    }

    #[test]
    fn decomposition_residual_decays() {
        let mut cs = Vec::new();
        for x in [50.0f64, 100.0] {
            let y = x.powf(2.0 / 3.0);
            let ind = SmoothedIndicator::new(x, Some(y), Sign::Plus).unwrap();
            let t_cap = (x * x) / (y * y);
            let mut c_here: f64 = 0.0;
            for t in [2.0, 4.0, 8.0, 13.0] {
                if t > t_cap {
                    continue;
                }
                let dec = decomposition(&ind, t).unwrap();
                c_here = c_here.max(dec.remainder.norm() * t.powf(1.5));
                // coefficient bounds
                let bound = (t.powf(-0.5)).min(t.powf(-1.5) * x / y);
                assert!(dec.a_coef.norm() <= 20.0 * bound);
                assert!(dec.b_coef.norm() <= 20.0 * bound);
            }
            cs.push(c_here);
        }
        let slope = (cs[1] / cs[0]).ln() / 2.0f64.ln();
        assert!(slope < 0.1, "residual constant grows: {cs:?}");
    }

    #[test]
    fn slow_tail_is_rejected() {
        // f(u) = u^{-1/2} gives an integrand ~ 1/x at s = 1
        let sp = sp_s(1.0, 0.0);
        let err = huber_numeric_fn(|u| u.powf(-0.5), None, &sp, 1e-10);
        assert!(matches!(
            err,
            Err(HuberError::Quadrature(crate::quad::QuadError::SlowDecay))
        ));
    }

    #[test]
    fn generic_callback_with_decaying_tail() {
        // f(u) = exp(1 - u) at s = 1: d = ∫ exp(-x²) dx = sqrt(π)/2
        let sp = sp_s(1.0, 0.0);
        let d = huber_numeric_fn(|u| (1.0 - u).exp(), None, &sp, 1e-12).unwrap();
        assert!((d.re - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-9);
    }
}
