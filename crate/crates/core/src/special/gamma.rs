//! Complex log-gamma via the Lanczos rational approximation (g = 607/128,
//! 14 coefficients, the set tabulated in Numerical Recipes 3rd ed.), with
//! reflection for Re z < 1/2. Relative accuracy ~1e-14 on moderate arguments.

use super::SpecialError;
use num_complex::Complex64;

const LANCZOS_SHIFT: f64 = 5.242_187_5; // g + 1/2, g = 607/128
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;
const C0: f64 = 0.999_999_999_999_997_092;
const COEF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    3.399_464_998_481_188_87e-5,
    4.652_362_892_704_857_56e-5,
    -9.837_447_530_487_956_46e-5,
    1.580_887_032_249_124_94e-4,
    -2.102_644_417_241_048_83e-4,
    2.174_396_181_152_126_43e-4,
    -1.643_181_065_367_638_9e-4,
    8.441_822_398_385_274_33e-5,
    -2.619_083_840_158_140_87e-5,
    3.689_918_265_953_162_34e-6,
];

/// Distance below which an argument counts as a nonpositive integer pole.
pub const POLE_TOL: f64 = 1e-13;

pub fn is_nonpositive_integer(z: Complex64) -> Option<i64> {
    if z.im.abs() > POLE_TOL {
        return None;
    }
    let n = z.re.round();
    if n <= 0.0 && (z.re - n).abs() <= POLE_TOL {
        Some(n as i64)
    } else {
        None
    }
}

fn lanczos_log_gamma(z: Complex64) -> Complex64 {
    // valid for Re z >= 0.5
    let tmp = z + LANCZOS_SHIFT;
    let mut ser = Complex64::new(C0, 0.0);
    for (j, &c) in COEF.iter().enumerate() {
        ser += c / (z + (j as f64 + 1.0));
    }
    (z + 0.5) * tmp.ln() - tmp + (SQRT_TWO_PI * ser / z).ln()
}

/// log(sin(πz)) stable against overflow for large |Im z|.
fn log_sin_pi(z: Complex64) -> Complex64 {
    let w = std::f64::consts::PI * z;
    let i = Complex64::new(0.0, 1.0);
    if w.im > 1.0 {
        // sin w = e^{-iw} (1 - e^{2iw}) i / 2 for Im w large positive
        -i * w + i * std::f64::consts::FRAC_PI_2 - std::f64::consts::LN_2
            + (1.0 - (2.0 * i * w).exp()).ln()
    } else if w.im < -1.0 {
        i * w - i * std::f64::consts::FRAC_PI_2 - std::f64::consts::LN_2
            + (1.0 - (-2.0 * i * w).exp()).ln()
    } else {
        w.sin().ln()
    }
}

/// Principal-branch log Γ(z). Errors on nonpositive-integer poles.
pub fn log_gamma(z: Complex64) -> Result<Complex64, SpecialError> {
    if is_nonpositive_integer(z).is_some() {
        return Err(SpecialError::PoleAtNonpositiveInteger(z));
    }
    if z.re >= 0.5 {
        Ok(lanczos_log_gamma(z))
    } else {
        // reflection: log Γ(z) = log π - log sin(πz) - log Γ(1-z)
        Ok(std::f64::consts::PI.ln() - log_sin_pi(z) - lanczos_log_gamma(1.0 - z))
    }
}

pub fn gamma(z: Complex64) -> Result<Complex64, SpecialError> {
    Ok(log_gamma(z)?.exp())
}

/// 1/Γ(z), entire: returns 0 at the poles of Γ.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(lg) => (-lg).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// exp(Σ log Γ(num) - Σ log Γ(den)), evaluated in log space so that huge
/// individual factors cancel before exponentiation. A pole in a denominator
/// factor kills the ratio (returns 0); a pole in a numerator factor is an
/// error unless a denominator pole cancels it, which we do not attempt to
/// regularize here.
pub fn gamma_ratio(num: &[Complex64], den: &[Complex64]) -> Result<Complex64, SpecialError> {
    let mut den_pole = false;
    for &d in den {
        if is_nonpositive_integer(d).is_some() {
            den_pole = true;
        }
    }
    for &n in num {
        if is_nonpositive_integer(n).is_some() {
            if den_pole {
                return Err(SpecialError::DegenerateParameters(
                    "gamma ratio has poles in numerator and denominator".into(),
                ));
            }
            return Err(SpecialError::PoleAtNonpositiveInteger(n));
        }
    }
    if den_pole {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &n in num {
        acc += log_gamma(n)?;
    }
    for &d in den {
        acc -= log_gamma(d)?;
    }
    Ok(acc.exp())
}
