//! The coordinate change `(xi, eta) = (x - y, Z(x, y))` and the
//! coefficients of the transformed equation
//!
//! ```text
//! u_t + u u_eta = K u_eta_eta + A u_xi_eta + 2 u_xi_xi + B u_eta
//! ```
//!
//! `K`, `A` and `B` depend on `xi` only, through the slope `p = phi'(G(xi))`
//! and curvature `phi''(G(xi))`.

use crate::error::Result;
use crate::geometry::{CurvatureSupport, Curve};

/// Coefficients of the transformed equation at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffSample {
    pub xi: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub k_prime: f64,
    /// Smaller eigenvalue of `[[K, A/2], [A/2, 2]]`.
    pub d: f64,
}

/// Uniform coefficient bounds of one curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffBounds {
    pub k_min: f64,
    pub k_max: f64,
    pub a_max: f64,
    pub b_max: f64,
    pub d: f64,
}

pub fn to_transformed(curve: &Curve, x: f64, y: f64) -> Result<(f64, f64)> {
    Ok((x - y, curve.z(x, y)?))
}

pub fn from_transformed(curve: &Curve, xi: f64, eta: f64) -> Result<(f64, f64)> {
    let x = curve.g(xi)? + eta;
    Ok((x, x - xi))
}

/// `K(p) = (1 + p^2) / (1 - p)^2`.
pub fn k_of_slope(p: f64) -> f64 {
    (1.0 + p * p) / ((1.0 - p) * (1.0 - p))
}

/// `A(p) = -2 (1 + p) / (1 - p)`.
pub fn a_of_slope(p: f64) -> f64 {
    -2.0 * (1.0 + p) / (1.0 - p)
}

/// Smaller eigenvalue of the symmetric matrix `[[k, a/2], [a/2, 2]]`.
pub fn pointwise_ellipticity(k: f64, a: f64) -> f64 {
    let mean = 0.5 * (k + 2.0);
    let half_gap = 0.5 * (k - 2.0);
    mean - (half_gap * half_gap + 0.25 * a * a).sqrt()
}

/// Coefficients from the slope `p`, curvature `pp` and `G' = 1 / (1 - p)`.
pub fn coefficients_from_jet(xi: f64, p: f64, pp: f64) -> CoeffSample {
    let m = 1.0 - p;
    let m3 = m * m * m;
    let k = k_of_slope(p);
    let a = a_of_slope(p);
    let b = -2.0 * pp / m3;
    let k_prime = 2.0 * (1.0 + p) * pp / (m3 * m);
    CoeffSample { xi, k, a, b, k_prime, d: pointwise_ellipticity(k, a) }
}

pub fn eval_kab(curve: &Curve, xi: f64) -> Result<CoeffSample> {
    let g = curve.g(xi)?;
    let j = curve.eval(g);
    Ok(coefficients_from_jet(xi, j.dphi, j.ddphi))
}

/// `B(xi)` as the derivative of `-2 / (1 - phi'(G(xi)))`, by Richardson
/// extrapolated central differences with base step `h`.
pub fn b_by_difference(curve: &Curve, xi: f64, h: f64) -> Result<f64> {
    let f = |s: f64| -> Result<f64> { Ok(-2.0 / (1.0 - curve.eval(curve.g(s)?).dphi)) };
    let central = |h: f64| -> Result<f64> { Ok((f(xi + h)? - f(xi - h)?) / (2.0 * h)) };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Points where the curve bends, sampled densely; empty for lines.
fn bending_samples(curve: &Curve, n: usize) -> Vec<f64> {
    let (lo, hi) = match curve.curvature_support() {
        CurvatureSupport::Empty => return Vec::new(),
        CurvatureSupport::Bounded(lo, hi) => (lo, hi),
        CurvatureSupport::Unbounded => match curve.kind() {
            crate::geometry::CurveKind::PerturbedLine { width, .. } => (-50.0 * width, 50.0 * width),
            _ => unreachable!("only perturbed lines have unbounded curvature support"),
        },
    };
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Infimum over `xi` of the pointwise ellipticity constant.
///
/// Since `xi -> G(xi)` is a bijection the infimum is taken over a dense grid
/// of `G` values covering the bending region plus the constant tails.
pub fn ellipticity_constant(curve: &Curve) -> f64 {
    coefficient_bounds(curve).d
}

/// Sharp per-curve bounds `K_min <= K <= K_max`, `|A| <= a_max`,
/// `|B| <= b_max` and the ellipticity constant.
pub fn coefficient_bounds(curve: &Curve) -> CoeffBounds {
    let (k1, k2) = curve.asymptotic_slopes();
    let mut bounds = CoeffBounds {
        k_min: f64::INFINITY,
        k_max: f64::NEG_INFINITY,
        a_max: 0.0,
        b_max: 0.0,
        d: f64::INFINITY,
    };
    let mut fold = |p: f64, pp: f64| {
        let c = coefficients_from_jet(0.0, p, pp);
        bounds.k_min = bounds.k_min.min(c.k);
        bounds.k_max = bounds.k_max.max(c.k);
        bounds.a_max = bounds.a_max.max(c.a.abs());
        bounds.b_max = bounds.b_max.max(c.b.abs());
        bounds.d = bounds.d.min(c.d);
    };
    fold(k1, 0.0);
    fold(k2, 0.0);
    for x in bending_samples(curve, 20_001) {
        let j = curve.eval(x);
        fold(j.dphi, j.ddphi);
    }
    // K is minimal at slope -1; include it when the slope range crosses it
    let (lo, hi) = curve.slope_range();
    if lo <= -1.0 && -1.0 <= hi {
        bounds.k_min = bounds.k_min.min(0.5);
    }
    bounds
}

/// Coefficient table `xi, K, A, B, K'` on a uniform grid.
pub fn coefficient_profile(curve: &Curve, lo: f64, hi: f64, n: usize) -> Result<Vec<CoeffSample>> {
    (0..n)
        .map(|i| {
            let xi = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            eval_kab(curve, xi)
        })
        .collect()
}
