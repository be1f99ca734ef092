//! Initial discontinuity curves `y = phi(x)` and the implicit functions
//! built on them.
//!
//! Every admissible curve satisfies the hyperbolicity margin
//! `1 - phi'(x) >= d0 > 0`. Under that margin
//!
//! * `Z(x, y)`, the root of `y - Z - phi(x - Z) = 0`, exists and is unique,
//! * `G(xi)`, the root of `-xi + G - phi(G) = 0`, exists and is unique,
//!
//! and both residual maps are strictly monotone, so a bracketed Newton
//! iteration always converges.
//!
//! Three curve families are supported: straight lines, mollified two-slope
//! polylines (the broken line `k1 x + c1` / `k2 x + c2` convolved with a
//! compactly supported bump of radius `eps0`), and lines carrying a bounded
//! `atan` perturbation.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, GaussLegendre};
use crate::roots::{solve_monotone, ImplicitResult, NewtonOptions};

/// Number of grid points used to estimate `d0` for non-affine curves.
pub const MARGIN_SAMPLES: usize = 100_000;

/// Default tolerance of the implicit solvers.
pub const IMPLICIT_TOL: f64 = 1e-12;

/// Curve family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    Line { k: f64, c: f64 },
    MollifiedPolyline { k1: f64, c1: f64, k2: f64, c2: f64, eps0: f64 },
    PerturbedLine { k: f64, c: f64, amplitude: f64, width: f64 },
}

/// `(phi, phi', phi'')` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
}

/// Where `phi''` may be non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureSupport {
    Empty,
    Bounded(f64, f64),
    Unbounded,
}

/// Validated initial discontinuity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curve {
    kind: CurveKind,
    d0: f64,
    slope_min: f64,
    slope_max: f64,
}

/// First and second derivatives of `Z(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZDerivatives {
    pub zx: f64,
    pub zy: f64,
    pub zxx: f64,
    pub zxy: f64,
    pub zyy: f64,
}

impl Curve {
    pub fn line(k: f64, c: f64) -> Result<Self> {
        Self::new(CurveKind::Line { k, c })
    }

    /// Mollified polyline. Equal slopes and offsets collapse to a line.
    pub fn mollify_polyline(k1: f64, c1: f64, k2: f64, c2: f64, eps0: f64) -> Result<Self> {
        Self::new(CurveKind::MollifiedPolyline { k1, c1, k2, c2, eps0 })
    }

    pub fn perturbed_line(k: f64, c: f64, amplitude: f64, width: f64) -> Result<Self> {
        Self::new(CurveKind::PerturbedLine { k, c, amplitude, width })
    }

    /// Validates parameters and computes the hyperbolicity margin.
    pub fn new(kind: CurveKind) -> Result<Self> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("curve parameter {name} = {v} is not finite")))
            }
        };
        match kind {
            CurveKind::Line { k, c } => {
                finite("k", k)?;
                finite("c", c)?;
                let margin = 1.0 - k;
                if margin <= 0.0 {
                    return Err(Error::HyperbolicityViolated { margin, at: 0.0 });
                }
                Ok(Self { kind, d0: margin, slope_min: k, slope_max: k })
            }
            CurveKind::MollifiedPolyline { k1, c1, k2, c2, eps0 } => {
                for (n, v) in [("k1", k1), ("c1", c1), ("k2", k2), ("c2", c2), ("eps0", eps0)] {
                    finite(n, v)?;
                }
                if eps0 <= 0.0 {
                    return Err(Error::InvalidArgument(format!("eps0 must be positive, got {eps0}")));
                }
                if k1 == k2 && c1 == c2 {
                    return Self::line(k1, c1);
                }
                for (k, at) in [(k1, -eps0), (k2, eps0)] {
                    if k >= 1.0 {
                        return Err(Error::HyperbolicityViolated { margin: 1.0 - k, at });
                    }
                }
                let mut curve = Self { kind, d0: 0.0, slope_min: k1.min(k2), slope_max: k1.max(k2) };
                curve.scan_slopes(-eps0, eps0)?;
                Ok(curve)
            }
            CurveKind::PerturbedLine { k, c, amplitude, width } => {
                for (n, v) in [("k", k), ("c", c), ("amplitude", amplitude), ("width", width)] {
                    finite(n, v)?;
                }
                if width <= 0.0 {
                    return Err(Error::InvalidArgument(format!("width must be positive, got {width}")));
                }
                if amplitude == 0.0 {
                    return Self::line(k, c);
                }
                // phi' = k + (a/w) / (1 + s^2) peaks at s = 0
                let peak = amplitude / width;
                let slope_max = k + peak.max(0.0);
                let slope_min = k + peak.min(0.0);
                if slope_max >= 1.0 {
                    return Err(Error::HyperbolicityViolated { margin: 1.0 - slope_max, at: 0.0 });
                }
                let mut curve = Self { kind, d0: 1.0 - slope_max, slope_min, slope_max };
                curve.scan_slopes(-50.0 * width, 50.0 * width)?;
                Ok(curve)
            }
        }
    }

    /// Samples `phi'` densely on [lo, hi], folds the samples into the slope
    /// range and sets `d0`.
    fn scan_slopes(&mut self, lo: f64, hi: f64) -> Result<()> {
        let mut worst = (f64::INFINITY, 0.0);
        let n = MARGIN_SAMPLES;
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let s = self.eval(x).dphi;
            self.slope_min = self.slope_min.min(s);
            self.slope_max = self.slope_max.max(s);
            if 1.0 - s < worst.0 {
                worst = (1.0 - s, x);
            }
        }
        let margin = 1.0 - self.slope_max;
        if margin <= 0.0 {
            return Err(Error::HyperbolicityViolated { margin: worst.0.min(margin), at: worst.1 });
        }
        self.d0 = margin;
        Ok(())
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// Hyperbolicity margin `d0 = inf (1 - phi')`.
    pub fn d0(&self) -> f64 {
        self.d0
    }

    /// `(min phi', max phi')` over the real line.
    pub fn slope_range(&self) -> (f64, f64) {
        (self.slope_min, self.slope_max)
    }

    /// Slopes of the curve as `x -> -inf` and `x -> +inf`.
    pub fn asymptotic_slopes(&self) -> (f64, f64) {
        match self.kind {
            CurveKind::Line { k, .. } | CurveKind::PerturbedLine { k, .. } => (k, k),
            CurveKind::MollifiedPolyline { k1, k2, .. } => (k1, k2),
        }
    }

    pub fn curvature_support(&self) -> CurvatureSupport {
        match self.kind {
            CurveKind::Line { .. } => CurvatureSupport::Empty,
            CurveKind::MollifiedPolyline { eps0, .. } => CurvatureSupport::Bounded(-eps0, eps0),
            CurveKind::PerturbedLine { .. } => CurvatureSupport::Unbounded,
        }
    }

    /// The same curve moved up by `m`.
    pub fn shifted(&self, m: f64) -> Curve {
        let kind = match self.kind {
            CurveKind::Line { k, c } => CurveKind::Line { k, c: c + m },
            CurveKind::MollifiedPolyline { k1, c1, k2, c2, eps0 } => {
                CurveKind::MollifiedPolyline { k1, c1: c1 + m, k2, c2: c2 + m, eps0 }
            }
            CurveKind::PerturbedLine { k, c, amplitude, width } => {
                CurveKind::PerturbedLine { k, c: c + m, amplitude, width }
            }
        };
        Curve { kind, ..*self }
    }

    pub fn eval(&self, x: f64) -> CurveJet {
        match self.kind {
            CurveKind::Line { k, c } => CurveJet { phi: k * x + c, dphi: k, ddphi: 0.0 },
            CurveKind::MollifiedPolyline { k1, c1, k2, c2, eps0 } => {
                if x <= -eps0 {
                    return CurveJet { phi: k1 * x + c1, dphi: k1, ddphi: 0.0 };
                }
                if x >= eps0 {
                    return CurveJet { phi: k2 * x + c2, dphi: k2, ddphi: 0.0 };
                }
                let tab = mollifier();
                let s = x / eps0;
                let cum = tab.cumulative(s);
                let moment = tab.first_moment(s);
                let (bump, dbump) = tab.density(s);
                let alpha = bump / eps0;
                let dalpha = dbump / (eps0 * eps0);
                // alpha * ramp = x A(x) - int_{-eps}^{x} y alpha(y) dy
                let ramp = x * cum - eps0 * moment;
                CurveJet {
                    phi: k1 * x + c1 + (k2 - k1) * ramp + (c2 - c1) * cum,
                    dphi: k1 + (k2 - k1) * cum + (c2 - c1) * alpha,
                    ddphi: (k2 - k1) * alpha + (c2 - c1) * dalpha,
                }
            }
            CurveKind::PerturbedLine { k, c, amplitude, width } => {
                let s = x / width;
                let q = 1.0 + s * s;
                CurveJet {
                    phi: k * x + c + amplitude * s.atan(),
                    dphi: k + amplitude / (width * q),
                    ddphi: -2.0 * amplitude * s / (width * width * q * q),
                }
            }
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.eval(x).phi
    }

    /// Solves `y - Z - phi(x - Z) = 0`.
    pub fn solve_z(&self, x: f64, y: f64, tol: f64) -> Result<ImplicitResult> {
        check_tol(tol)?;
        let at_x = self.eval(x);
        let gap = y - at_x.phi;
        if gap == 0.0 {
            return Ok(ImplicitResult { value: 0.0, residual: 0.0, iterations: 0 });
        }
        if let CurveKind::Line { k, c } = self.kind {
            let z = (y - k * x - c) / (1.0 - k);
            let residual = y - z - (k * (x - z) + c);
            return Ok(ImplicitResult { value: z, residual, iterations: 1 });
        }
        // Z (1 - phi'(theta)) = y - phi(x) brackets Z between 0 and gap / d0
        let far = gap / self.d0 * (1.0 + 1e-6);
        let guess = gap / (1.0 - at_x.dphi);
        solve_monotone(
            "solve_z",
            |z| {
                let j = self.eval(x - z);
                (y - z - j.phi, -(1.0 - j.dphi))
            },
            guess,
            0.0,
            far,
            NewtonOptions { tol, ..Default::default() },
        )
    }

    pub fn z(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.solve_z(x, y, IMPLICIT_TOL)?.value)
    }

    /// Derivatives of `Z` at `(x, y)`.
    pub fn dz(&self, x: f64, y: f64) -> Result<ZDerivatives> {
        let z = self.z(x, y)?;
        Ok(self.dz_at(x, z))
    }

    /// Derivatives of `Z` given the already solved value `z = Z(x, y)`.
    pub fn dz_at(&self, x: f64, z: f64) -> ZDerivatives {
        let j = self.eval(x - z);
        let m = 1.0 - j.dphi;
        let second = -j.ddphi / (m * m * m);
        ZDerivatives { zx: -j.dphi / m, zy: 1.0 / m, zxx: second, zxy: -second, zyy: second }
    }

    /// Solves `-xi + G - phi(G) = 0`.
    pub fn solve_g(&self, xi: f64, tol: f64) -> Result<ImplicitResult> {
        check_tol(tol)?;
        if let CurveKind::Line { k, c } = self.kind {
            let g = (xi + c) / (1.0 - k);
            let residual = -xi + g - (k * g + c);
            return Ok(ImplicitResult { value: g, residual, iterations: 1 });
        }
        let at0 = self.eval(0.0);
        // G (1 - phi'(theta)) = xi + phi(0)
        let rhs = xi + at0.phi;
        if rhs == 0.0 {
            return Ok(ImplicitResult { value: 0.0, residual: 0.0, iterations: 0 });
        }
        let far = rhs / self.d0 * (1.0 + 1e-6);
        let guess = rhs / (1.0 - at0.dphi);
        solve_monotone(
            "solve_g",
            |g| {
                let j = self.eval(g);
                (-xi + g - j.phi, 1.0 - j.dphi)
            },
            guess,
            0.0,
            far,
            NewtonOptions { tol, ..Default::default() },
        )
    }

    pub fn g(&self, xi: f64) -> Result<f64> {
        Ok(self.solve_g(xi, IMPLICIT_TOL)?.value)
    }

    /// `G'(xi) = 1 / (1 - phi'(G(xi)))`.
    pub fn g_prime(&self, xi: f64) -> Result<f64> {
        let g = self.g(xi)?;
        Ok(1.0 / (1.0 - self.eval(g).dphi))
    }

    /// `[G1, G2] = [G^{-1}(-eps0), G^{-1}(eps0)]`, the `xi`-strip outside of
    /// which the transformed coefficients are constant. `None` for lines
    /// (no strip) and for curves with unbounded curvature support.
    pub fn xi_strip(&self) -> Option<(f64, f64)> {
        match self.curvature_support() {
            CurvatureSupport::Bounded(lo, hi) => Some((lo - self.phi(lo), hi - self.phi(hi))),
            _ => None,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Unnormalised bump `exp(-1 / (1 - s^2))` on (-1, 1).
fn raw_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Normalised bump on [-1, 1] with tabulated cumulative integral and first
/// moment. Values between table nodes use cubic Hermite interpolation with
/// the exact node slopes (the density itself); the cumulative table is
/// additionally Fritsch–Carlson limited so it stays monotone.
#[derive(Debug)]
pub struct MollifierTable {
    norm: f64,
    step: f64,
    cumulative: Vec<f64>,
    moment: Vec<f64>,
}

const TABLE_CELLS: usize = 4096;

/// The shared mollifier table (built on first use).
pub fn mollifier() -> &'static MollifierTable {
    static TABLE: OnceLock<MollifierTable> = OnceLock::new();
    TABLE.get_or_init(MollifierTable::build)
}

impl MollifierTable {
    fn build() -> Self {
        let mass = integrate_adaptive(raw_bump, -1.0, 1.0, 1e-15).expect("bump mass quadrature");
        let norm = 1.0 / mass;
        let rule = GaussLegendre::new(20);
        let step = 2.0 / TABLE_CELLS as f64;
        let mut cumulative = Vec::with_capacity(TABLE_CELLS + 1);
        let mut moment = Vec::with_capacity(TABLE_CELLS + 1);
        let (mut acc, mut mom) = (0.0, 0.0);
        cumulative.push(0.0);
        moment.push(0.0);
        for i in 0..TABLE_CELLS {
            let a = -1.0 + i as f64 * step;
            let b = a + step;
            acc += norm * rule.composite(raw_bump, a, b, 1);
            mom += norm * rule.composite(|s| s * raw_bump(s), a, b, 1);
            cumulative.push(acc);
            moment.push(mom);
        }
        Self { norm, step, cumulative, moment }
    }

    /// Normalising constant `C` with `C * int exp(-1/(1-s^2)) ds = 1`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Normalised density and its derivative at `s`.
    pub fn density(&self, s: f64) -> (f64, f64) {
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let q = 1.0 - s * s;
        let v = self.norm * (-1.0 / q).exp();
        (v, v * (-2.0 * s / (q * q)))
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let pos = (s + 1.0) / self.step;
        let k = (pos.floor() as usize).min(TABLE_CELLS - 1);
        (k, pos - k as f64)
    }

    /// `int_{-1}^{s}` of the normalised density.
    pub fn cumulative(&self, s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let (k, t) = self.locate(s);
        let (y0, y1) = (self.cumulative[k], self.cumulative[k + 1]);
        let s0 = -1.0 + k as f64 * self.step;
        let mut d0 = self.density(s0).0;
        let mut d1 = self.density(s0 + self.step).0;
        let secant = (y1 - y0) / self.step;
        if secant <= 0.0 {
            return y0;
        }
        let (a, b) = (d0 / secant, d1 / secant);
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            d0 *= tau;
            d1 *= tau;
        }
        hermite(y0, y1, d0 * self.step, d1 * self.step, t)
    }

    /// `int_{-1}^{s} u * density(u) du`.
    pub fn first_moment(&self, s: f64) -> f64 {
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let (k, t) = self.locate(s);
        let s0 = -1.0 + k as f64 * self.step;
        let s1 = s0 + self.step;
        let d0 = s0 * self.density(s0).0;
        let d1 = s1 * self.density(s1).0;
        hermite(self.moment[k], self.moment[k + 1], d0 * self.step, d1 * self.step, t)
    }
}

fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polyline() -> Curve {
        Curve::mollify_polyline(-1.0, 0.0, 0.5, 0.0, 1.0).unwrap()
    }

    #[test]
    fn line_evaluation() {
        let c = Curve::line(0.5, 1.0).unwrap();
        assert_eq!(c.eval(3.0), CurveJet { phi: 2.5, dphi: 0.5, ddphi: 0.0 });
        assert_eq!(c.d0(), 0.5);
    }

    #[test]
    fn flat_polyline_is_zero_line() {
        let c = Curve::mollify_polyline(0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(c.kind(), CurveKind::Line { .. }));
        for x in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            assert_eq!(c.eval(x), CurveJet { phi: 0.0, dphi: 0.0, ddphi: 0.0 });
        }
    }

    #[test]
    fn equal_pieces_collapse_to_line() {
        let c = Curve::mollify_polyline(0.3, -2.0, 0.3, -2.0, 0.5).unwrap();
        assert_eq!(c.kind(), CurveKind::Line { k: 0.3, c: -2.0 });
    }

    #[test]
    fn polyline_tails_are_exact() {
        let c = polyline();
        let j = c.eval(2.0);
        assert_eq!(j.dphi, 0.5);
        assert_eq!(j.ddphi, 0.0);
        assert_eq!(c.eval(-1.0).dphi, -1.0);
        assert_eq!(c.eval(1.0).ddphi, 0.0);
        assert_eq!(c.eval(-1.0).ddphi, 0.0);
    }

    #[test]
    fn polyline_margin_matches_tail_slope() {
        let c = polyline();
        assert!((c.d0() - 0.5).abs() < 1e-12);
        let (lo, hi) = c.slope_range();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn polyline_slope_is_monotone_between_tails() {
        let c = polyline();
        let mut prev = c.eval(-1.0).dphi;
        for i in 1..=2000 {
            let x = -1.0 + i as f64 * 1e-3;
            let s = c.eval(x).dphi;
            assert!(s >= prev - 1e-15, "slope decreased at x = {x}");
            prev = s;
        }
    }

    #[test]
    fn steep_jump_violates_hyperbolicity() {
        let err = Curve::mollify_polyline(0.0, 0.0, 0.0, 10.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::HyperbolicityViolated { .. }));
        // the bound used by the oracle: peak of (c2 - c1) alpha exceeds 1 - k
        let peak = 10.0 * mollifier().density(0.0).0 / 0.1;
        assert!(peak > 1.0);
    }

    #[test]
    fn unit_slope_line_is_rejected() {
        assert!(matches!(Curve::line(1.0, 0.0), Err(Error::HyperbolicityViolated { .. })));
        assert!(matches!(
            Curve::perturbed_line(0.5, 0.0, 1.0, 1.0),
            Err(Error::HyperbolicityViolated { .. })
        ));
    }

    #[test]
    fn mollifier_cumulative_matches_quadrature() {
        let tab = mollifier();
        for i in 0..200 {
            let s = -0.999 + 1.998 * (i as f64 + 0.37) / 200.0;
            let direct = integrate_adaptive(|u| tab.norm() * raw_bump(u), -1.0, s, 1e-15).unwrap();
            assert!((tab.cumulative(s) - direct).abs() < 1e-10, "s = {s}");
            let mom = integrate_adaptive(|u| u * tab.norm() * raw_bump(u), -1.0, s, 1e-15).unwrap();
            assert!((tab.first_moment(s) - mom).abs() < 1e-10, "s = {s}");
        }
        assert!((tab.cumulative(1.0 - 1e-12) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polyline_derivatives_match_finite_differences() {
        let c = Curve::mollify_polyline(-0.4, 0.3, 0.6, -0.2, 1.5).unwrap();
        let h = 1e-5;
        for x in [-1.2, -0.5, 0.0, 0.3, 1.1] {
            let fd1 = (c.phi(x + h) - c.phi(x - h)) / (2.0 * h);
            let fd2 = (c.eval(x + h).dphi - c.eval(x - h).dphi) / (2.0 * h);
            assert!((fd1 - c.eval(x).dphi).abs() < 1e-8, "phi' at {x}");
            assert!((fd2 - c.eval(x).ddphi).abs() < 1e-6, "phi'' at {x}");
        }
    }

    #[test]
    fn line_z_closed_form() {
        let c = Curve::line(0.0, 0.0).unwrap();
        assert_eq!(c.z(1.3, 2.0).unwrap(), 2.0);
        let c = Curve::line(0.25, -1.0).unwrap();
        let z = c.z(2.0, 3.0).unwrap();
        assert!((z - (3.0 - 0.5 + 1.0) / 0.75).abs() < 1e-14);
    }

    #[test]
    fn sharp_polyline_limit() {
        // phi = 0 for x < 0 and x/2 for x >= 0; Z(2, 3) = 3 on the x - Z < 0 branch
        let c = Curve::mollify_polyline(0.0, 0.0, 0.5, 0.0, 1e-3).unwrap();
        assert!((c.z(2.0, 3.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn point_on_curve_has_zero_z() {
        let c = polyline();
        for x in [-2.0, -0.3, 0.4, 3.0] {
            assert_eq!(c.z(x, c.phi(x)).unwrap(), 0.0);
        }
    }

    #[test]
    fn z_derivatives_for_line() {
        let k = 0.3;
        let c = Curve::line(k, 2.0).unwrap();
        let d = c.dz(1.0, -4.0).unwrap();
        assert!((d.zx + k / (1.0 - k)).abs() < 1e-15);
        assert!((d.zy - 1.0 / (1.0 - k)).abs() < 1e-15);
        assert_eq!((d.zxx, d.zyy), (0.0, 0.0));
        assert_eq!(d.zxy, 0.0);
    }

    #[test]
    fn g_for_line_through_origin() {
        let c = Curve::line(-0.5, 0.0).unwrap();
        assert!((c.g(3.0).unwrap() - 3.0 / 1.5).abs() < 1e-14);
    }

    #[test]
    fn g_vanishes_at_minus_phi_zero() {
        let c = Curve::mollify_polyline(-0.3, 1.0, 0.4, 2.0, 2.0).unwrap();
        let xi = -c.phi(0.0);
        assert_eq!(c.g(xi).unwrap(), 0.0);
    }

    #[test]
    fn strip_endpoints_invert_g() {
        let c = polyline();
        let (g1, g2) = c.xi_strip().unwrap();
        assert!((c.g(g1).unwrap() + 1.0).abs() < 1e-12);
        assert!((c.g(g2).unwrap() - 1.0).abs() < 1e-12);
        assert!(Curve::line(0.2, 0.0).unwrap().xi_strip().is_none());
    }

    #[test]
    fn perturbed_line_slope_bounds() {
        let c = Curve::perturbed_line(0.1, 0.0, 0.4, 2.0).unwrap();
        assert!((c.d0() - (1.0 - 0.1 - 0.2)).abs() < 1e-12);
        let c = Curve::perturbed_line(0.1, 0.0, -0.4, 2.0).unwrap();
        assert!((c.d0() - 0.9).abs() < 1e-12);
        assert!((c.slope_range().0 - (0.1 - 0.2)).abs() < 1e-9);
    }

    #[test]
    fn shifting_moves_every_point() {
        let c = polyline();
        let s = c.shifted(0.75);
        for x in [-3.0, -0.5, 0.1, 4.0] {
            assert!((s.phi(x) - c.phi(x) - 0.75).abs() < 1e-14);
        }
        assert_eq!(s.d0(), c.d0());
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(polyline().solve_z(0.0, 1.0, 0.0).is_err());
    }
}
