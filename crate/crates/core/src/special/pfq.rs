//! Generalized hypergeometric series ₚF_q and the large-argument connection
//! formula DLMF 16.8.8 for ₃F₂, which re-expands the function around z = ∞
//! as three Γ-weighted summands in 1/z.

use super::gamma::{gamma_ratio, is_nonpositive_integer};
use super::hyp2f1::hyp2f1;
use super::SpecialError;
use crate::quad::{integrate_with_breakpoints, QuadOptions};
use num_complex::Complex64;

const QUIET_TERMS: usize = 50;
const MAX_TERMS: usize = 100_000;
const EPS: f64 = 1e-16;

/// Integer-congruence tolerance for the 16.8.8 degeneracy test.
pub const DEGENERACY_TOL: f64 = 1e-8;

fn terminating_order(params: &[Complex64]) -> Option<usize> {
    params
        .iter()
        .filter_map(|&a| is_nonpositive_integer(a).map(|n| (-n) as usize))
        .min()
}

fn series(alphas: &[Complex64], betas: &[Complex64], z: Complex64) -> Result<Complex64, SpecialError> {
    let n_stop = terminating_order(alphas);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut quiet = 0;
    for k in 0..MAX_TERMS {
        if let Some(n) = n_stop {
            if k >= n {
                return Ok(sum);
            }
        }
        let kf = k as f64;
        let mut ratio = z / (kf + 1.0);
        for &a in alphas {
            ratio *= a + kf;
        }
        for &b in betas {
            let den = b + kf;
            if den.norm() < 1e-14 {
                return Err(SpecialError::ParameterPole(format!(
                    "pFq lower parameter {b} hits a pole at term {k}"
                )));
            }
            ratio /= den;
        }
        term *= ratio;
        sum += term;
        if term.norm() <= EPS * sum.norm().max(1e-280) {
            quiet += 1;
            if quiet >= QUIET_TERMS {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(SpecialError::ContinuationFailure(format!(
        "pFq series did not settle within {MAX_TERMS} terms at z = {z}"
    )))
}

/// Direct generalized hypergeometric series. For p = q+1 the argument must
/// satisfy |z| < 1 unless the series terminates; for p > q+1 the series
/// diverges for every z ≠ 0.
pub fn hyp_pfq(
    alphas: &[Complex64],
    betas: &[Complex64],
    z: Complex64,
) -> Result<Complex64, SpecialError> {
    for &b in betas {
        if is_nonpositive_integer(b).is_some() {
            let rescued = terminating_order(alphas)
                .is_some_and(|n| n <= (-is_nonpositive_integer(b).unwrap()) as usize);
            if !rescued {
                return Err(SpecialError::ParameterPole(format!(
                    "pFq lower parameter {b} is a nonpositive integer"
                )));
            }
        }
    }
    if z.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let terminating = terminating_order(alphas).is_some();
    if !terminating {
        if alphas.len() > betas.len() + 1 {
            return Err(SpecialError::Divergent(format!(
                "{}F{} has zero radius of convergence",
                alphas.len(),
                betas.len()
            )));
        }
        if alphas.len() == betas.len() + 1 && z.norm() >= 1.0 {
            return Err(SpecialError::Divergent(format!(
                "{}F{} series requires |z| < 1, got |z| = {}",
                alphas.len(),
                betas.len(),
                z.norm()
            )));
        }
    }
    series(alphas, betas, z)
}

/// Strip upper/lower parameter pairs that coincide, e.g.
/// ₃F₂(a,b,c; d,a; z) = ₂F₁(b,c; d; z).
fn reduce_params(alphas: &[Complex64], betas: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut al: Vec<Complex64> = alphas.to_vec();
    let mut be: Vec<Complex64> = betas.to_vec();
    let mut i = 0;
    while i < al.len() {
        if let Some(j) = be.iter().position(|&b| (b - al[i]).norm() < 1e-12) {
            al.remove(i);
            be.remove(j);
        } else {
            i += 1;
        }
    }
    (al, be)
}

/// One summand of the 16.8.8 re-expansion: `value` is
/// `coefficient · (-z)^{-a_j} · f`, the quantity whose sum over j recovers
/// the left side.
#[derive(Debug, Clone, Copy)]
pub struct ConnectionSummand {
    pub coefficient: Complex64,
    pub power: Complex64,
    pub f: Complex64,
    pub value: Complex64,
}

/// The three 16.8.8 summands for ₃F₂(a₁,a₂,a₃; b₁,b₂; z), each evaluated
/// with principal branches, valid off the ray z ∈ [0, ∞). Fails when two
/// upper parameters are congruent mod 1 (the Γ factors degenerate); callers
/// recover by perturbing their spectral parameter.
pub fn connect_3f2_large_argument(
    alphas: &[Complex64; 3],
    betas: &[Complex64; 2],
    z: Complex64,
) -> Result<[ConnectionSummand; 3], SpecialError> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(SpecialError::ContinuationFailure(format!(
            "16.8.8 requires |arg(-z)| < π, got z = {z}"
        )));
    }
    for j in 0..3 {
        for k in (j + 1)..3 {
            let d = alphas[k] - alphas[j];
            if d.im.abs() <= DEGENERACY_TOL && (d.re - d.re.round()).abs() <= DEGENERACY_TOL {
                return Err(SpecialError::DegenerateParameters(format!(
                    "upper parameters {} and {} differ by an integer",
                    alphas[j], alphas[k]
                )));
            }
        }
    }
    let w = 1.0 / z;
    let mut out = [ConnectionSummand {
        coefficient: Complex64::new(0.0, 0.0),
        power: Complex64::new(0.0, 0.0),
        f: Complex64::new(0.0, 0.0),
        value: Complex64::new(0.0, 0.0),
    }; 3];
    for j in 0..3 {
        let aj = alphas[j];
        let others: Vec<Complex64> = (0..3).filter(|&k| k != j).map(|k| alphas[k]).collect();
        let mut num = vec![others[0] - aj, others[1] - aj];
        num.extend_from_slice(betas);
        let den = vec![others[0], others[1], betas[0] - aj, betas[1] - aj];
        let coefficient = gamma_ratio(&num, &den)?;
        let inner_al = [aj, 1.0 - betas[0] + aj, 1.0 - betas[1] + aj];
        let inner_be = [1.0 - others[0] + aj, 1.0 - others[1] + aj];
        let f = if coefficient.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            eval_pfq_continued_depth(&inner_al, &inner_be, w, 1)?
        };
        let power = (-z).powc(-aj);
        out[j] = ConnectionSummand {
            coefficient,
            power,
            f,
            value: coefficient * power * f,
        };
    }
    Ok(out)
}

/// Evaluate ₚF_q with continuation: parameter-pair reduction, then the
/// direct series, a ₂F₁ path, or (for ₃F₂ with |z| > 1) the 16.8.8 sum.
pub fn eval_pfq_continued(
    alphas: &[Complex64],
    betas: &[Complex64],
    z: Complex64,
) -> Result<Complex64, SpecialError> {
    eval_pfq_continued_depth(alphas, betas, z, 0)
}

fn eval_pfq_continued_depth(
    alphas: &[Complex64],
    betas: &[Complex64],
    z: Complex64,
    depth: usize,
) -> Result<Complex64, SpecialError> {
    let (al, be) = reduce_params(alphas, betas);
    if z.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if terminating_order(&al).is_some() {
        return series(&al, &be, z);
    }
    match (al.len(), be.len()) {
        (p, q) if p <= q => series(&al, &be, z),
        (1, 0) => Ok((1.0 - z).powc(-al[0])),
        (2, 1) => hyp2f1(al[0], al[1], be[0], z),
        (3, 2) => {
            let al3 = [al[0], al[1], al[2]];
            let be2 = [be[0], be[1]];
            if z.norm() <= 0.95 {
                series(&al, &be, z)
            } else if z.norm() >= 1.05 && depth < 2 {
                match connect_3f2_large_argument(&al3, &be2, z) {
                    Ok(summands) => Ok(summands.iter().map(|s| s.value).sum()),
                    Err(SpecialError::DegenerateParameters(_)) => integral_rep_3f2(&al3, &be2, z),
                    Err(e) => Err(e),
                }
            } else {
                integral_rep_3f2(&al3, &be2, z)
            }
        }
        (p, q) => Err(SpecialError::Divergent(format!(
            "no continuation for {p}F{q} at |z| >= 1"
        ))),
    }
}

/// Euler-type integral for ₃F₂, used when 16.8.8 degenerates:
/// ∫₀¹ t^{γ-1}(1-t)^{ρ-1} ₂F₁(α,β;δ;zt) dt = B(γ,ρ) ₃F₂(α,β,γ; δ,γ+ρ; z),
/// valid by continuation for z off [1, ∞). Endpoint powers are regularized
/// with cubic substitutions before adaptive quadrature.
fn integral_rep_3f2(
    al: &[Complex64; 3],
    be: &[Complex64; 2],
    z: Complex64,
) -> Result<Complex64, SpecialError> {
    if z.im == 0.0 && z.re >= 1.0 {
        return Err(SpecialError::ContinuationFailure(format!(
            "3F2 integral representation needs z off [1, ∞), got {z}"
        )));
    }
    let mut choice = None;
    for (j, aj) in al.iter().enumerate() {
        for (k, bk) in be.iter().enumerate() {
            if aj.re >= 0.45 && (bk - aj).re >= 0.1 {
                choice = Some((j, k));
            }
        }
    }
    let (j, k) = choice.ok_or_else(|| {
        SpecialError::ContinuationFailure(
            "no admissible parameter pair for the 3F2 integral representation".into(),
        )
    })?;
    let gam = al[j];
    let rho = be[k] - al[j];
    let others: Vec<Complex64> = (0..3).filter(|&i| i != j).map(|i| al[i]).collect();
    let delta = be[1 - k];
    let pref = gamma_ratio(&[be[k]], &[gam, rho])?;
    let inner = |t: f64| -> Complex64 {
        hyp2f1(others[0], others[1], delta, z * t).unwrap_or(Complex64::new(f64::NAN, 0.0))
    };
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_intervals: 20_000,
    };
    let half = 0.5f64;
    // left endpoint: t = v³ kills the t^{γ-1} singularity for Re γ ≥ 0.45
    let left = integrate_with_breakpoints(
        |v: f64| {
            let t = v * v * v;
            3.0 * Complex64::new(v, 0.0).powc(3.0 * gam - 1.0)
                * Complex64::new(1.0 - t, 0.0).powc(rho - 1.0)
                * inner(t)
        },
        0.0,
        half.cbrt(),
        &[],
        opts,
    )
    .map_err(|e| SpecialError::ContinuationFailure(format!("3F2 integral: {e}")))?;
    // right endpoint: 1 - t = u³
    let right = integrate_with_breakpoints(
        |u: f64| {
            let t = 1.0 - u * u * u;
            3.0 * Complex64::new(u, 0.0).powc(3.0 * rho - 1.0)
                * Complex64::new(t, 0.0).powc(gam - 1.0)
                * inner(t)
        },
        0.0,
        half.cbrt(),
        &[],
        opts,
    )
    .map_err(|e| SpecialError::ContinuationFailure(format!("3F2 integral: {e}")))?;
    let total = left.value + right.value;
    if !total.re.is_finite() || !total.im.is_finite() {
        return Err(SpecialError::ContinuationFailure(
            "3F2 integral representation produced non-finite values".into(),
        ));
    }
    Ok(pref * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Upper/lower parameters of the ₃F₂ arising from the perpendicular
    /// counting kernel at spectral parameter s.
    fn kernel_params(s: Complex64) -> ([Complex64; 3], [Complex64; 2]) {
        (
            [(1.0 - s) / 2.0, s / 2.0, c(1.0, 0.0)],
            [c(0.5, 0.0), c(2.5, 0.0)],
        )
    }

    #[test]
    fn value_one_at_origin() {
        let v = hyp_pfq(&[c(0.3, 0.2), c(1.1, 0.0)], &[c(0.9, 0.0)], c(0.0, 0.0)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn reduction_matches_gauss() {
        let (a, b, cc, d) = (c(0.4, 0.3), c(0.8, -0.1), c(1.3, 0.0), c(1.9, 0.0));
        let z = c(-0.3, 0.0);
        let full = hyp_pfq(&[a, b, cc], &[d, a], z).unwrap();
        let gauss = hyp2f1(b, cc, d, z).unwrap();
        assert!((full - gauss).norm() < 1e-12 * gauss.norm());
        // and through the continuation dispatcher
        let red = eval_pfq_continued(&[a, b, cc], &[d, a], z).unwrap();
        assert!((red - gauss).norm() < 1e-12 * gauss.norm());
    }

    #[test]
    fn divergence_and_poles_rejected() {
        assert!(matches!(
            hyp_pfq(&[c(1.0, 0.0); 4], &[c(2.0, 0.0); 2], c(0.1, 0.0)),
            Err(SpecialError::Divergent(_))
        ));
        assert!(matches!(
            hyp_pfq(&[c(0.5, 0.0); 3], &[c(2.0, 0.0), c(1.5, 0.0)], c(1.2, 0.0)),
            Err(SpecialError::Divergent(_))
        ));
        assert!(matches!(
            hyp_pfq(&[c(0.5, 0.0)], &[c(-1.0, 0.0)], c(0.2, 0.0)),
            Err(SpecialError::ParameterPole(_))
        ));
    }

    #[test]
    fn large_argument_tail_is_small() {
        // 3F2(1, 3/2, -1/2; (s+3)/2, (4-s)/2; -1/z²) = 1 + O(z⁻²) at z = 100
        let s = c(0.5, 2.0);
        let z = 100.0;
        let v = hyp_pfq(
            &[c(1.0, 0.0), c(1.5, 0.0), c(-0.5, 0.0)],
            &[(s + 3.0) / 2.0, (4.0 - s) / 2.0],
            c(-1.0 / (z * z), 0.0),
        )
        .unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn euler_integral_formula_for_parameter_insertion() {
        // ∫₀¹ x^{μ-1}(1-x)^{ν-1} ₂F₁(a,b;c;αx) dx
        //   = Γ(μ)Γ(ν)/Γ(μ+ν) ₃F₂(μ,a,b; μ+ν,c; α)
        use crate::quad::{integrate, QuadOptions};
        use crate::special::gamma::gamma_ratio;
        let (mu, nu) = (c(1.3, 0.0), c(2.1, 0.0));
        let (a, b, cc) = (c(0.4, 0.2), c(0.9, -0.1), c(1.7, 0.0));
        let alpha = c(-0.6, 0.0);
        let quad = integrate(
            |x: f64| {
                c(x, 0.0).powc(mu - 1.0)
                    * c(1.0 - x, 0.0).powc(nu - 1.0)
                    * hyp2f1(a, b, cc, alpha * x).unwrap()
            },
            0.0,
            1.0,
            QuadOptions::with_tol(1e-12),
        )
        .unwrap();
        let closed = gamma_ratio(&[mu, nu], &[mu + nu]).unwrap()
            * hyp_pfq(&[mu, a, b], &[mu + nu, cc], alpha).unwrap();
        assert!(
            (quad.value - closed).norm() < 1e-8 * closed.norm(),
            "{} vs {closed}",
            quad.value
        );
    }

    #[test]
    fn connection_matches_series_inside_disk() {
        // both sides computable at z = -0.8: series directly, summands via
        // the recursive continuation
        for s in [c(0.63, 0.0), c(0.5, 1.7), c(0.8, -0.4)] {
            let (al, be) = kernel_params(s);
            let z = c(-0.8, 0.0);
            let direct = hyp_pfq(&al, &be, z).unwrap();
            let summands = connect_3f2_large_argument(&al, &be, z).unwrap();
            let total: Complex64 = summands.iter().map(|t| t.value).sum();
            assert!(
                (total - direct).norm() < 1e-8 * direct.norm().max(1.0),
                "s = {s}: {total} vs {direct}"
            );
        }
    }

    #[test]
    fn connection_rejects_congruent_parameters() {
        for s in [c(0.5, 0.0), c(1.0, 0.0)] {
            let (al, be) = kernel_params(s);
            assert!(matches!(
                connect_3f2_large_argument(&al, &be, c(-25.0, 0.0)),
                Err(SpecialError::DegenerateParameters(_))
            ));
        }
    }

    #[test]
    fn summand_magnitudes_follow_predicted_powers() {
        // |w_j(-A²)| scales like A^{s-1}, A^{-s}, A^{-2}; fit log-log slopes
        let s = c(0.6, 0.0);
        let (al, be) = kernel_params(s);
        let scales = [25.0, 50.0, 100.0];
        let mut mags = Vec::new();
        for &a in &scales {
            let summands = connect_3f2_large_argument(&al, &be, c(-a * a, 0.0)).unwrap();
            mags.push(summands.map(|t| (t.power * t.f).norm()));
        }
        let expected = [s.re - 1.0, -s.re, -2.0];
        for j in 0..3 {
            let slope = (mags[2][j] / mags[0][j]).ln() / (scales[2] / scales[0]).ln();
            assert!(
                (slope - expected[j]).abs() < 0.05,
                "summand {j}: slope {slope} vs {}",
                expected[j]
            );
        }
    }
}
