//! The inviscid rarefaction wave behind a curved discontinuity.
//!
//! For `t > 0` the wave is `u-` below the lower fan boundary
//! `y = u- t + phi(x - u- t)`, `u+` above the upper boundary
//! `y = u+ t + phi(x - u+ t)`, and `Z(x, y) / t` in between.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Curve;

/// End states and the initial discontinuity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannData {
    pub u_minus: f64,
    pub u_plus: f64,
    pub curve: Curve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Minus,
    Fan,
    Plus,
}

impl RiemannData {
    pub fn new(u_minus: f64, u_plus: f64, curve: Curve) -> Result<Self> {
        if !(u_minus.is_finite() && u_plus.is_finite()) {
            return Err(Error::InvalidArgument("end states must be finite".into()));
        }
        if u_minus >= u_plus {
            return Err(Error::InvalidArgument(format!(
                "rarefaction needs u_minus < u_plus, got {u_minus} >= {u_plus}"
            )));
        }
        Ok(Self { u_minus, u_plus, curve })
    }

    /// Lower and upper fan boundaries `y = u t + phi(x - u t)` at `x`.
    pub fn fan_boundaries(&self, t: f64, x: f64) -> (f64, f64) {
        let lower = self.u_minus * t + self.curve.phi(x - self.u_minus * t);
        let upper = self.u_plus * t + self.curve.phi(x - self.u_plus * t);
        (lower, upper)
    }

    /// Same data on the curve shifted up by `m`.
    pub fn shifted(&self, m: f64) -> Self {
        Self { curve: self.curve.shifted(m), ..*self }
    }

    fn max_speed(&self) -> f64 {
        self.u_minus.abs().max(self.u_plus.abs())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be positive, got {t}")))
    }
}

/// Region by comparing `y` with the two fan boundaries.
pub fn classify_region(data: &RiemannData, t: f64, x: f64, y: f64) -> Result<Region> {
    check_time(t)?;
    let (lower, upper) = data.fan_boundaries(t, x);
    Ok(if y < lower {
        Region::Minus
    } else if y > upper {
        Region::Plus
    } else {
        Region::Fan
    })
}

/// Region by comparing `Z(x, y)` with `u- t` and `u+ t`.
pub fn classify_region_by_z(data: &RiemannData, t: f64, x: f64, y: f64) -> Result<Region> {
    check_time(t)?;
    let z = data.curve.z(x, y)?;
    Ok(region_of_z(data, t, z))
}

fn region_of_z(data: &RiemannData, t: f64, z: f64) -> Region {
    if z < data.u_minus * t {
        Region::Minus
    } else if z > data.u_plus * t {
        Region::Plus
    } else {
        Region::Fan
    }
}

/// Wave value from an already solved `Z(x, y)`.
pub fn rarefaction_from_z(data: &RiemannData, t: f64, z: f64) -> f64 {
    (z / t).clamp(data.u_minus, data.u_plus)
}

pub fn eval_rarefaction(data: &RiemannData, t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    Ok(rarefaction_from_z(data, t, data.curve.z(x, y)?))
}

/// Finite list of sample points `(x, y)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleSet {
    pub points: Vec<(f64, f64)>,
}

impl SampleSet {
    /// Uniform tensor grid over a rectangle, `n` nodes per side.
    pub fn tensor(x: (f64, f64), y: (f64, f64), n: usize) -> Self {
        let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect()
        };
        let (xs, ys) = (axis(x), axis(y));
        let points = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
        Self { points }
    }

    /// Samples covering the fans of every `data` at time `t` over the
    /// `x`-range, with `n` nodes per side on the coarse grid.
    ///
    /// The `y`-range covers every fan plus a margin `(u+ - u-) t`. Each
    /// column is refined threefold within one coarse cell of every fan
    /// boundary.
    pub fn around_fans(data: &[RiemannData], t: f64, x: (f64, f64), n: usize) -> Self {
        let n = n.max(2);
        let xs: Vec<f64> = (0..n).map(|i| x.0 + (x.1 - x.0) * i as f64 / (n - 1) as f64).collect();
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        let mut margin: f64 = 0.0;
        for d in data {
            margin = margin.max((d.u_plus - d.u_minus) * t);
            for &xv in &xs {
                let (lower, upper) = d.fan_boundaries(t, xv);
                y_lo = y_lo.min(lower);
                y_hi = y_hi.max(upper);
            }
        }
        y_lo -= margin;
        y_hi += margin;
        let cell = (y_hi - y_lo) / (n - 1) as f64;
        let fine = cell / 3.0;
        let mut points = Vec::with_capacity(n * n + xs.len() * data.len() * 14);
        for &xv in &xs {
            for j in 0..n {
                points.push((xv, y_lo + cell * j as f64));
            }
            for d in data {
                let (lower, upper) = d.fan_boundaries(t, xv);
                for b in [lower, upper] {
                    for k in -3i32..=3 {
                        points.push((xv, b + fine * k as f64));
                    }
                }
            }
        }
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Signed differences `u1 - u2` at every sample, in sample order.
pub fn wave_differences(a: &RiemannData, b: &RiemannData, t: f64, samples: &SampleSet) -> Result<Vec<f64>> {
    check_time(t)?;
    if a.u_minus != b.u_minus || a.u_plus != b.u_plus {
        return Err(Error::InvalidArgument("compared waves must share end states".into()));
    }
    samples
        .points
        .par_iter()
        .map(|&(x, y)| Ok(eval_rarefaction(a, t, x, y)? - eval_rarefaction(b, t, x, y)?))
        .collect()
}

/// Sampled `sup |u1 - u2|`.
pub fn compare_waves(a: &RiemannData, b: &RiemannData, t: f64, samples: &SampleSet) -> Result<f64> {
    let diffs = wave_differences(a, b, t, samples)?;
    Ok(diffs.iter().fold(0.0, |m: f64, d| m.max(d.abs())))
}

/// Central-difference residual of `u_t + u u_x + u u_y` at `(t, x, y)`.
///
/// Every stencil point within `2h` must lie in the region of the centre.
pub fn residual_inviscid(data: &RiemannData, t: f64, x: f64, y: f64, h: f64) -> Result<f64> {
    check_time(t)?;
    if !(h > 0.0 && 2.0 * h < t) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive and below t/2")));
    }
    let z = data.curve.z(x, y)?;
    let centre = region_of_z(data, t, z);
    let d = 2.0 * h;
    for (dt, dx, dy) in [(d, 0.0, 0.0), (-d, 0.0, 0.0), (0.0, d, 0.0), (0.0, -d, 0.0), (0.0, 0.0, d), (0.0, 0.0, -d)] {
        if classify_region_by_z(data, t + dt, x + dx, y + dy)? != centre {
            let gap = (z - data.u_minus * t).abs().min((z - data.u_plus * t).abs());
            return Err(Error::RegionBoundaryTooClose { distance: gap, required: d * (1.0 + data.max_speed()) });
        }
    }
    let u = |t: f64, x: f64, y: f64| eval_rarefaction(data, t, x, y);
    let ut = (u(t + h, x, y)? - u(t - h, x, y)?) / (2.0 * h);
    let ux = (u(t, x + h, y)? - u(t, x - h, y)?) / (2.0 * h);
    let uy = (u(t, x, y + h)? - u(t, x, y - h)?) / (2.0 * h);
    let uc = rarefaction_from_z(data, t, z);
    Ok(ut + uc * (ux + uy))
}
