//! Both sides of the relative trace formula and the counting experiments
//! built on them.
//!
//! Geometric side: f(1)·len(l) + Σ_exceptional q̃(B(γ)) + Σ_regular q(B(γ))
//! over a double-coset inventory. Spectral side: Σ_j 2 d_{t_j}(f) û_j² over
//! supplied spectral data, with a dyadic tail bound for the unsupplied
//! range. The counting function N(X) (cosets with B < X, strictly) is
//! compared against the main term M(X) = Σ (2/π) γ₁(s_j) û_j² X^{s_j}, and
//! the error E = N - M is scanned in mean square over sample grids.

use crate::group::{
    coset_inventory_between, CosetClass, GroupError, GroupPresentation, Inventory,
    InventoryOptions,
};
use crate::huber::{gamma_factors, huber_closed, HuberError};
use crate::quad::{integrate_with_breakpoints, QuadError, QuadOptions};
use crate::special::SpectralParameter;
use crate::testfn::{SmoothedIndicator, TestFnError};
use crate::MoebiusElement;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CountError {
    #[error("inventory unstable or too shallow for the requested threshold {0}")]
    IncompleteInventory(f64),
    #[error("spectral data must contain the constant eigenfunction (s = 1)")]
    MissingConstantEigenfunction,
    #[error("spectral file line {line}: {message}")]
    SpectralParse { line: usize, message: String },
    #[error("sample grid does not fit: R·δ = {0} exceeds X = {1}")]
    GridTooWide(f64, f64),
    #[error(transparent)]
    Huber(#[from] HuberError),
    #[error(transparent)]
    TestFn(#[from] TestFnError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// One spectral datum: the parameter s_j and the period of the
/// corresponding Maass form along the geodesic. For two-geodesic counting
/// the second period is set and the spectral weight is the product.
#[derive(Debug, Clone, Copy)]
pub struct SpectralDatum {
    pub s: Complex64,
    pub period: f64,
    pub period2: Option<f64>,
}

impl SpectralDatum {
    pub fn new(s: Complex64, period: f64) -> Self {
        SpectralDatum {
            s,
            period,
            period2: None,
        }
    }

    pub fn weight(&self) -> f64 {
        self.period * self.period2.unwrap_or(self.period)
    }

    pub fn is_small_eigenvalue(&self) -> bool {
        SpectralParameter::from_s(self.s).is_small_eigenvalue()
    }
}

/// Parses spectral data lines `s_real,s_imag,period`; `#` comments allowed.
pub fn parse_spectral_data(text: &str) -> Result<Vec<SpectralDatum>, CountError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CountError::SpectralParse {
                line: line_no,
                message: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 3];
        for (slot, field) in vals.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| CountError::SpectralParse {
                line: line_no,
                message: format!("cannot parse {field:?} as a number"),
            })?;
        }
        out.push(SpectralDatum::new(Complex64::new(vals[0], vals[1]), vals[2]));
    }
    Ok(out)
}

fn require_coverage(inv: &Inventory, needed: f64) -> Result<(), CountError> {
    if !inv.is_stable() || inv.coverage() < needed {
        return Err(CountError::IncompleteInventory(needed));
    }
    Ok(())
}

/// The geometric side of the trace formula for a smoothed indicator, using
/// the closed forms of q and q̃.
pub fn geometric_side(
    pres: &GroupPresentation,
    inv: &Inventory,
    ind: &SmoothedIndicator,
    quad_tol: f64,
) -> Result<f64, CountError> {
    require_coverage(inv, ind.x() + ind.y())?;
    let mut total = ind.f(0.0) * pres.geodesic_length();
    for rep in inv.representatives() {
        match rep.class {
            CosetClass::Identity => {}
            CosetClass::Regular => {
                if rep.b_value < ind.x() + ind.y() {
                    total += ind.q(rep.b_value);
                }
            }
            CosetClass::Exceptional => {
                total += ind.q_tilde(rep.b_value, quad_tol)?;
            }
        }
    }
    Ok(total)
}

/// One per-coset verification record: the closed-form weight against the
/// line integral of the test function along the imaginary axis.
#[derive(Debug, Clone, Copy)]
pub struct CosetOracleRecord {
    pub b_value: f64,
    pub class: CosetClass,
    pub closed: f64,
    pub line_integral: f64,
    pub deviation: f64,
}

/// J_γ(f) = ∫ f(1/cos²v(γ·iy)) dy/y computed by quadrature in t = log y.
/// The argument is a²c²e^{2t} + b²d²e^{-2t} + (a²d² + b²c²), so the
/// integrand has compact support which is solved for explicitly.
pub fn line_integral_weight(
    g: &MoebiusElement,
    ind: &SmoothedIndicator,
    tol: f64,
) -> Result<f64, CountError> {
    let (a, b, c, d) = (g.a(), g.b(), g.c(), g.d());
    let ac2 = a * a * c * c;
    let bd2 = b * b * d * d;
    let base = a * a * d * d + b * b * c * c;
    let sup = ind.support_radius();
    let roof = sup * sup + 1.0 - base;
    // support bounds: ac² e^{2t} + bd² e^{-2t} = roof
    if roof * roof <= 4.0 * ac2 * bd2 {
        return Ok(0.0);
    }
    let disc = (roof * roof - 4.0 * ac2 * bd2).sqrt();
    let u_hi = (roof + disc) / (2.0 * ac2);
    let u_lo = (roof - disc) / (2.0 * ac2);
    if u_hi <= 0.0 {
        return Ok(0.0);
    }
    let t_hi = 0.5 * u_hi.ln();
    let t_lo = 0.5 * u_lo.max(1e-300).ln();
    // breakpoints where the argument crosses the corner radii of f
    let mut corners = Vec::new();
    for r in ind.corner_points() {
        let rhs = r * r + 1.0 - base;
        if rhs * rhs > 4.0 * ac2 * bd2 && rhs > 0.0 {
            let dc = (rhs * rhs - 4.0 * ac2 * bd2).sqrt();
            for u in [(rhs + dc) / (2.0 * ac2), (rhs - dc) / (2.0 * ac2)] {
                if u > 0.0 {
                    corners.push(0.5 * u.ln());
                }
            }
        }
    }
    let out = integrate_with_breakpoints(
        |t: f64| {
            let arg = ac2 * (2.0 * t).exp() + bd2 * (-2.0 * t).exp() + base;
            ind.f((arg - 1.0).max(0.0).sqrt())
        },
        t_lo,
        t_hi,
        &corners,
        QuadOptions::with_tol(tol),
    )?;
    Ok(out.value)
}

/// Runs the per-coset oracle over every representative relevant to the
/// indicator's support, in parallel.
pub fn geometric_side_oracle(
    inv: &Inventory,
    ind: &SmoothedIndicator,
    quad_tol: f64,
) -> Result<Vec<CosetOracleRecord>, CountError> {
    let reps: Vec<_> = inv
        .representatives()
        .iter()
        .filter(|r| r.class != CosetClass::Identity)
        .filter(|r| r.b_value < ind.x() + ind.y())
        .copied()
        .collect();
    reps.par_iter()
        .map(|rep| {
            let closed = match rep.class {
                CosetClass::Regular => ind.q(rep.b_value),
                CosetClass::Exceptional => ind.q_tilde(rep.b_value, quad_tol)?,
                CosetClass::Identity => unreachable!(),
            };
            let line_integral = line_integral_weight(&rep.element, ind, quad_tol)?;
            Ok(CosetOracleRecord {
                b_value: rep.b_value,
                class: rep.class,
                closed,
                line_integral,
                deviation: (closed - line_integral).abs(),
            })
        })
        .collect()
}

/// M(X) = Σ over small eigenvalues of (2/π) γ₁(s_j) û_j² X^{s_j}.
pub fn main_term(data: &[SpectralDatum], x: f64) -> Result<f64, CountError> {
    let smalls: Vec<&SpectralDatum> = data.iter().filter(|d| d.is_small_eigenvalue()).collect();
    if smalls.is_empty() {
        return Err(CountError::MissingConstantEigenfunction);
    }
    let mut total = 0.0;
    for d in smalls {
        let g1 = gamma_factors(d.s)
            .gamma1
            .ok_or(HuberError::FactorPole(d.s))?;
        let term = 2.0 / std::f64::consts::PI * g1 * d.weight() * Complex64::new(x, 0.0).powc(d.s);
        total += term.re;
    }
    Ok(total)
}

/// Count report at a single threshold.
#[derive(Debug, Clone, Copy)]
pub struct CountReport {
    pub x: f64,
    pub n_count: usize,
    pub main_term: f64,
    pub error: f64,
    pub regular_count: usize,
    pub exceptional_count: usize,
    pub word_depth: usize,
    pub stable: bool,
    /// The literature also uses a normalization differing by a factor of 2;
    /// reported for diagnostics, never used in the error term.
    pub main_term_halved: f64,
}

pub fn count(
    inv: &Inventory,
    data: &[SpectralDatum],
    x: f64,
) -> Result<CountReport, CountError> {
    require_coverage(inv, x)?;
    let n_count = inv.count_strictly_below(x);
    let m = main_term(data, x)?;
    Ok(CountReport {
        x,
        n_count,
        main_term: m,
        error: n_count as f64 - m,
        regular_count: inv.regular_count_below(x),
        exceptional_count: inv.exceptional_count(),
        word_depth: inv.depth_used(),
        stable: inv.is_stable(),
        main_term_halved: 0.5 * m,
    })
}

/// Spectral side over the supplied data plus a dyadic tail bound for the
/// unsupplied range |t| > T₀, scaled by the user's period-sum constant.
#[derive(Debug, Clone, Copy)]
pub struct SpectralSidePartial {
    pub sum: f64,
    pub tail_bound: f64,
    pub tail_from: f64,
}

pub fn spectral_side_partial(
    data: &[SpectralDatum],
    ind: &SmoothedIndicator,
    period_sum_constant: f64,
    tail_cutoff: Option<f64>,
) -> Result<SpectralSidePartial, CountError> {
    let mut sum = 0.0;
    let mut t_max = 1.0f64;
    for d in data {
        let sp = SpectralParameter::from_s(d.s);
        let dt = huber_closed(ind, &sp)?;
        sum += 2.0 * dt.re * d.weight();
        if sp.t().im.abs() < 1e-12 {
            t_max = t_max.max(sp.t().re.abs());
        }
    }
    if let Some(cutoff) = tail_cutoff {
        t_max = cutoff.max(1.0);
    }
    // dyadic blocks [2^n, 2^{n+1}) above the supplied range: each block is
    // bounded by sup|d_t| · Σ û², with sup|d_t| ≤ X^{1/2} min(2^{-n/2},
    // 2^{-3n/2} X/Y) and block period mass ≤ const · 2^{n+1}
    let x = ind.x();
    let y = ind.y();
    let n0 = t_max.log2().floor().max(0.0) as i32;
    let mut tail = 0.0;
    for n in n0..(n0 + 80) {
        let t = 2.0f64.powi(n);
        let sup_d = x.sqrt() * (t.powf(-0.5)).min(t.powf(-1.5) * x / y);
        tail += 2.0 * sup_d * period_sum_constant * 2.0 * t;
    }
    Ok(SpectralSidePartial {
        sum,
        tail_bound: tail,
        tail_from: 2.0f64.powi(n0),
    })
}

/// Mean-square scan of the error term over sample points in [X, 2X].
#[derive(Debug, Clone)]
pub struct MomentScan {
    pub points: Vec<CountReport>,
    pub mean_square: f64,
    pub r: usize,
    pub delta: f64,
}

/// The default grid: R points X + (m - 1/2)·δ with δ = X/R, pairwise
/// spacing exactly δ, all inside (X, 2X).
pub fn equally_spaced_samples(x: f64, r: usize, delta: f64) -> Vec<f64> {
    (1..=r).map(|m| x + (m as f64 - 0.5) * delta).collect()
}

/// Equally spaced sample points, nudged off inventory jump locations, each
/// counted independently.
pub fn moment_scan(
    inv: &Inventory,
    data: &[SpectralDatum],
    x: f64,
    r: usize,
    delta: Option<f64>,
) -> Result<MomentScan, CountError> {
    assert!(r >= 1);
    let delta = delta.unwrap_or(x / r as f64);
    if r as f64 * delta > x * (1.0 + 1e-12) {
        return Err(CountError::GridTooWide(r as f64 * delta, x));
    }
    moment_scan_at(inv, data, &equally_spaced_samples(x, r, delta), delta)
}

/// Moment scan over caller-supplied sample points (randomized spacings are
/// built by the front-end); `delta` records the declared minimal spacing.
pub fn moment_scan_at(
    inv: &Inventory,
    data: &[SpectralDatum],
    samples: &[f64],
    delta: f64,
) -> Result<MomentScan, CountError> {
    assert!(!samples.is_empty());
    let top = samples.iter().cloned().fold(0.0f64, f64::max);
    require_coverage(inv, top)?;
    let jumps = inv.jump_locations();
    let nudged: Vec<f64> = samples
        .iter()
        .map(|&xm| {
            let near = jumps
                .iter()
                .any(|&b| (b - xm).abs() < 1e-9 * xm.max(1.0));
            if near {
                xm + 1e-7 * xm
            } else {
                xm
            }
        })
        .collect();
    let points: Vec<CountReport> = nudged
        .par_iter()
        .map(|&xm| count(inv, data, xm))
        .collect::<Result<_, _>>()?;
    let r = samples.len();
    let mean_square = points.iter().map(|p| p.error * p.error).sum::<f64>() / r as f64;
    Ok(MomentScan {
        points,
        mean_square,
        r,
        delta,
    })
}

/// Inventory for counting between two geodesics: cosets H₂\Γ/H₁ keyed by
/// B(τ⁻¹γ), where τ carries the second axis onto the imaginary one.
pub fn inventory_between(
    pres: &GroupPresentation,
    pres2: &GroupPresentation,
    tau: &MoebiusElement,
    coverage: f64,
    max_depth: usize,
    opts: InventoryOptions,
) -> Result<Inventory, CountError> {
    Ok(coset_inventory_between(
        pres,
        pres2.m(),
        &tau.inverse(),
        coverage,
        max_depth,
        opts,
    )?)
}

/// Count report for perpendiculars between two geodesics. Spectral weights
/// should carry the product of the two periods (the `period2` field);
/// otherwise the single-geodesic square is used.
pub fn count_between(
    pres: &GroupPresentation,
    pres2: &GroupPresentation,
    tau: &MoebiusElement,
    data: &[SpectralDatum],
    x: f64,
    max_depth: usize,
    opts: InventoryOptions,
) -> Result<CountReport, CountError> {
    let inv = inventory_between(pres, pres2, tau, x, max_depth, opts)?;
    count(&inv, data, x)
}

/// Fixed-format float used in every CSV so identical runs are
/// byte-identical: scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{:.16e}", v)
}

pub const COUNT_CSV_HEADER: &str =
    "X,n_count,main_term,error,regular_count,exceptional_count,word_depth,stable";

pub fn count_csv_row(r: &CountReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        format_float(r.x),
        r.n_count,
        format_float(r.main_term),
        format_float(r.error),
        r.regular_count,
        r.exceptional_count,
        r.word_depth,
        u8::from(r.stable),
    )
}
