//! Numerical machinery for counting common perpendiculars between closed
//! geodesics on compact hyperbolic surfaces.
//!
//! The crate works on the upper half-plane with the geodesic of interest
//! placed on the imaginary axis, stabilized by the cyclic group generated by
//! `diag(m, 1/m)`. Double cosets of the surface group by that stabilizer
//! correspond to perpendicular arcs, and their count is governed by a
//! relative trace formula: a geometric side (sums of smoothed indicators over
//! coset invariants) balanced against a spectral side (Huber transforms of
//! the test function paired with Maass-form periods).
//!
//! Modules:
//! - [`geometry`]: half-plane points, Möbius actions, the point-pair
//!   invariant and the closed-form distance minimization between axes.
//! - [`special`]: complex gamma, Gauss and generalized hypergeometric
//!   functions with analytic continuation, Legendre functions of imaginary
//!   argument.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature.
//! - [`testfn`]: the piecewise-linear smoothed indicator family and its
//!   Weyl-integral inversions.
//! - [`huber`]: the Huber transform by quadrature, by hypergeometric closed
//!   form, and by asymptotic expansion.
//! - [`group`]: group presentations, word-ball enumeration, double-coset
//!   reduction and inventories.
//! - [`counting`]: both sides of the trace formula, count reports, moment
//!   scans, CSV emission.

// Quadrature node tables carry published digits beyond f64 resolution, and
// `!(x > c)` comparisons are deliberate NaN rejections.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod counting;
pub mod geometry;
pub mod group;
pub mod huber;
pub mod quad;
pub mod special;
pub mod testfn;

pub use geometry::{AngleCoordinates, MoebiusElement, Point};
pub use special::SpectralParameter;
pub use testfn::{SmoothedIndicator, Sign};
