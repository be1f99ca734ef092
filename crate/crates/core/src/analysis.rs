//! Discrete norms, decay-rate fits and the experiment procedures.

use std::io::Write;

use crate::error::{Error, Result};
use crate::exactwave::{compare_waves, RiemannData, SampleSet};
use crate::solver::{
    initial_field, run, Advection, Boundary, Bump, Grid2D, Reference, ReferenceKind, SolverConfig, Stepper,
};
use crate::profiles::ViscousProfile;

/// Slack added to asserted exponents.
pub const EPS_FIT: f64 = 0.05;

/// Time series of one norm.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub label: String,
    /// Norm order; `f64::INFINITY` for the max norm.
    pub p: f64,
    pub samples: Vec<(f64, f64)>,
}

impl DecaySeries {
    pub fn new(label: impl Into<String>, p: f64) -> Self {
        Self { label: label.into(), p, samples: Vec::new() }
    }

    pub fn push(&mut self, t: f64, value: f64) {
        self.samples.push((t, value));
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    /// `p` as written in CSV output (`inf` for the max norm).
    pub fn p_label(&self) -> String {
        format_p(self.p)
    }
}

pub fn format_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

/// Least-squares fit of `ln(value) - q ln ln(3+t) = exponent ln(1+t) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub log_power: Option<f64>,
    pub samples: usize,
}

/// Discrete `L^p` norm `(sum |f|^p h1 h2)^(1/p)`, or the max for `p = inf`.
pub fn lp_norm(values: &[f64], cell_area: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    }
    // scale by the max to avoid overflow for large p
    let scale = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    scale * (sum * cell_area).powf(1.0 / p)
}

/// Fits the decay exponent over samples with `t` in `window` (inclusive).
/// `log_power` fixes the exponent `q` of an `ln^q(3+t)` factor.
pub fn fit_decay(series: &DecaySeries, window: (f64, f64), log_power: Option<f64>) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = series
        .samples
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "{}: {} samples in window [{}, {}]",
            series.label,
            pts.len(),
            window.0,
            window.1
        )));
    }
    if let Some(&(t, v)) = pts.iter().find(|&&(_, v)| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit(format!("{}: value {v} at t = {t} is not positive", series.label)));
    }
    let q = log_power.unwrap_or(0.0);
    let xs: Vec<f64> = pts.iter().map(|&(t, _)| (1.0 + t).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|&(t, v)| v.ln() - q * (3.0 + t).ln().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(format!("{}: all samples at one time", series.label)));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let resid: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    let r2 = if syy <= 1e-300 { 1.0 } else { (1.0 - resid / syy).clamp(0.0, 1.0) };
    Ok(RateFit { exponent, intercept, r2, window, log_power, samples: pts.len() })
}

/// Geometric time ladder `start, 2 start, ...` up to `end`, with `end`
/// appended when it is not on the ladder.
pub fn time_ladder(start: f64, end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = start;
    while t < end * (1.0 - 1e-12) {
        out.push(t);
        t *= 2.0;
    }
    out.push(end);
    out
}


/// Writes series as CSV rows `t,norm_name,p,value` after a comment line
/// carrying the tool version and config hash.
pub fn write_series_csv<W: Write>(mut w: W, series: &[DecaySeries], config_hash: &str) -> Result<()> {
    writeln!(w, "# burgers2d {} config={config_hash}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "t,norm_name,p,value")?;
    for s in series {
        for &(t, v) in &s.samples {
            writeln!(w, "{t},{},{},{v:e}", s.label, s.p_label())?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub title: String,
    /// Filled in by the caller; empty when run outside the harness.
    pub config_hash: String,
    pub grid: String,
    pub series: Vec<DecaySeries>,
    pub fits: Vec<(String, RateFit)>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(title: &str, grid: String) -> Self {
        Self { title: title.into(), config_hash: String::new(), grid, series: Vec::new(), fits: Vec::new(), checks: Vec::new() }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn series(&self, label: &str, p: f64) -> Option<&DecaySeries> {
        self.series.iter().find(|s| s.label == label && (s.p == p || (s.p.is_infinite() && p.is_infinite())))
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{}\nconfig: {}\ngrid: {}\n", self.title, self.config_hash, self.grid);
        for s in &self.series {
            out.push_str(&format!("{} (p = {}):", s.label, s.p_label()));
            for &(t, v) in &s.samples {
                out.push_str(&format!(" t={t}:{v:.4e}"));
            }
            out.push('\n');
        }
        for (name, f) in &self.fits {
            out.push_str(&format!(
                "fit {name}: exponent {:.4} r2 {:.4} over [{}, {}]{}\n",
                f.exponent,
                f.r2,
                f.window.0,
                f.window.1,
                f.log_power.map(|q| format!(" with ln^{q}(3+t)")).unwrap_or_default()
            ));
        }
        for c in &self.checks {
            out.push_str(&format!("[{}] {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        out
    }
}

/// Index of the maximum and whether `values` stays within `tol` (relative)
/// of non-increasing after it.
pub fn non_increasing_after_peak(values: &[f64], tol: f64) -> (usize, bool) {
    let peak = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });
    let ok = values[peak..].windows(2).all(|w| w[1] <= w[0] * (1.0 + tol));
    (peak, ok)
}

/// Sampled `t sup |u1 - u2|` over a time ladder; checks the envelope is
/// finite and non-increasing after its peak within 5%.
pub fn experiment_curve_stability(
    a: &RiemannData,
    b: &RiemannData,
    times: &[f64],
    x_range: (f64, f64),
    n: usize,
) -> Result<Report> {
    let mut report = Report::new("curve stability", format!("x in [{}, {}], {n} nodes per side", x_range.0, x_range.1));
    let mut sup = DecaySeries::new("sup_diff", f64::INFINITY);
    let mut scaled = DecaySeries::new("t_sup_diff", f64::INFINITY);
    for &t in times {
        let samples = SampleSet::around_fans(&[*a, *b], t, x_range, n);
        let s = compare_waves(a, b, t, &samples)?;
        sup.push(t, s);
        scaled.push(t, t * s);
    }
    let values = scaled.values();
    let envelope = values.iter().fold(0.0, |m: f64, &v| m.max(v));
    let (peak, ok) = non_increasing_after_peak(&values, 0.05);
    report.check("envelope finite", envelope.is_finite(), format!("max t sup = {envelope:.6}"));
    report.check(
        "non-increasing after peak",
        ok,
        format!("peak at t = {}, values {:?}", times.get(peak).copied().unwrap_or(f64::NAN), rounded(&values)),
    );
    report.series = vec![sup, scaled];
    Ok(report)
}

fn rounded(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.4e}")).collect()
}

/// Parameters of a perturbed-wave run.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedRun {
    pub data: RiemannData,
    pub bump: Option<Bump>,
    pub grid: Grid2D,
    /// Snapshot times; the run starts at zero.
    pub times: Vec<f64>,
    pub fit_window: (f64, f64),
    pub advection: Advection,
    pub cfl: f64,
    pub boundary_refresh: f64,
}

impl PerturbedRun {
    pub fn new(data: RiemannData, bump: Option<Bump>, grid: Grid2D, times: Vec<f64>) -> Self {
        Self {
            data,
            bump,
            grid,
            times,
            fit_window: (4.0, 64.0),
            advection: Advection::LocalLaxFriedrichs,
            cfl: 0.8,
            boundary_refresh: 0.05,
        }
    }

    fn grid_label(&self, coords: &str) -> String {
        let g = &self.grid;
        format!(
            "{coords} [{}, {}] x [{}, {}], {} x {} nodes, h = ({:.4}, {:.4})",
            g.lo1,
            g.hi1,
            g.lo2,
            g.hi2,
            g.n1,
            g.n2,
            g.h1(),
            g.h2()
        )
    }

    fn solver_config(&self, norms: Vec<f64>) -> Result<SolverConfig> {
        let end = *self.times.last().ok_or_else(|| Error::InvalidArgument("empty time ladder".into()))?;
        Ok(SolverConfig {
            cfl: self.cfl,
            end_time: end,
            snapshots: self.times.clone(),
            norms,
            boundary_refresh: self.boundary_refresh,
            keep_fields: false,
            ..SolverConfig::default()
        })
    }
}

/// Runs the perturbed wave in the original coordinates with `u^R` on the
/// boundary and fits the decay of `|u - u^R|_inf` over the fit window.
/// `target` is the largest admissible exponent.
pub fn experiment_main_theorem(setup: &PerturbedRun, target: f64) -> Result<Report> {
    let stepper = Stepper::original(setup.grid, setup.advection);
    let reference = Reference::new(setup.data, ReferenceKind::Exact, &stepper)?;
    let initial = initial_field(&stepper, &setup.data, setup.bump.as_ref(), 0.0)?;
    let out = run(
        &stepper,
        initial,
        &setup.solver_config(vec![f64::INFINITY, 2.0])?,
        &Boundary::Dirichlet(reference.clone()),
        Some(&reference),
    )?;
    let mut report = Report::new("main theorem", setup.grid_label("original"));
    let sup = out.series[0].clone();
    let fit = fit_decay(&sup, setup.fit_window, None)?;
    let in_window: Vec<f64> = sup
        .samples
        .iter()
        .filter(|s| s.0 >= setup.fit_window.0 && s.0 <= setup.fit_window.1)
        .map(|s| s.1)
        .collect();
    let monotone = in_window.windows(2).all(|w| w[1] < w[0]);
    report.check("sup norm decreasing", monotone, format!("{:?}", rounded(&in_window)));
    report.check("fitted exponent", fit.exponent <= target, format!("{:.4} <= {target:.4}", fit.exponent));
    report.check(
        "maximum principle",
        out.max_principle_excess <= 1e-12,
        format!("largest excursion {:.3e} over {} steps", out.max_principle_excess, out.steps),
    );
    let ln3 = fit_decay(&sup, setup.fit_window, Some(3.0))?;
    report.fits.push(("u_minus_ref inf".into(), fit));
    report.fits.push(("u_minus_ref inf / ln^3".into(), ln3));
    report.series = out.series;
    Ok(report)
}

/// Runs the perturbed wave in the transformed coordinates against the
/// viscous profile and checks `|pert|_6 / ln(3+t)` stays bounded and
/// `|pert|_8` does not grow over the fit window.
pub fn experiment_perturbation_norms(setup: &PerturbedRun) -> Result<Report> {
    let stepper = Stepper::transformed(setup.grid, setup.data.curve, setup.advection)?;
    let profile = ViscousProfile::new(setup.data.u_minus, setup.data.u_plus)?;
    let reference = Reference::new(setup.data, ReferenceKind::Viscous(profile), &stepper)?;
    let initial = initial_field(&stepper, &setup.data, setup.bump.as_ref(), 0.0)?;
    let out = run(
        &stepper,
        initial,
        &setup.solver_config(vec![6.0, 8.0, f64::INFINITY])?,
        &Boundary::Dirichlet(reference.clone()),
        Some(&reference),
    )?;
    let mut report = Report::new("perturbation norms", setup.grid_label("transformed"));
    let (lo, hi) = setup.fit_window;
    let window = |s: &DecaySeries| -> Vec<(f64, f64)> {
        s.samples.iter().copied().filter(|&(t, _)| t >= lo && t <= hi).collect()
    };
    let l6 = window(&out.series[0]);
    let l8 = window(&out.series[1]);
    if l6.len() < 2 {
        return Err(Error::DegenerateFit(format!("fewer than two snapshots in [{lo}, {hi}]")));
    }
    let ratio: Vec<f64> = l6.iter().map(|&(t, v)| v / (3.0 + t).ln()).collect();
    let ratio_max = ratio.iter().fold(0.0, |m: f64, &v| m.max(v));
    report.check(
        "L6 / ln(3+t) bounded",
        ratio_max <= 1.05 * ratio[0],
        format!("max {ratio_max:.4e} vs start {:.4e}", ratio[0]),
    );
    let fit8 = fit_decay(&out.series[1], setup.fit_window, None)?;
    let l8_max = l8.iter().fold(0.0, |m: f64, &(_, v)| m.max(v));
    report.check("L8 exponent", fit8.exponent <= 0.0, format!("{:.4} <= 0", fit8.exponent));
    report.check("L8 non-growing", l8_max <= 1.05 * l8[0].1, format!("max {l8_max:.4e} vs start {:.4e}", l8[0].1));
    report.fits.push(("u_minus_v 8".into(), fit8));
    for s in &out.series[2..] {
        if let Ok(f) = fit_decay(s, setup.fit_window, None) {
            report.fits.push((format!("{} {}", s.label, s.p_label()), f));
        }
    }
    report.series = out.series;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> DecaySeries {
        let mut s = DecaySeries::new("synthetic", 2.0);
        for t in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
            s.push(t, f(t));
        }
        s
    }

    #[test]
    fn zero_field_norm() {
        assert_eq!(lp_norm(&[0.0; 10], 0.1, 2.0), 0.0);
    }

    #[test]
    fn single_cell_norm() {
        let mut v = vec![0.0; 9];
        v[4] = 3.0;
        let area: f64 = 0.01;
        assert!((lp_norm(&v, area, 2.0) - 3.0 * area.sqrt()).abs() < 1e-15);
        assert!((lp_norm(&v, area, 6.0) - 3.0 * area.powf(1.0 / 6.0)).abs() < 1e-14);
        assert_eq!(lp_norm(&v, area, f64::INFINITY), 3.0);
    }

    #[test]
    fn power_law_is_recovered() {
        let fit = fit_decay(&synthetic(|t| (1.0 + t).powf(-0.5)), (0.0, 100.0), None).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_exponent() {
        let fit = fit_decay(&synthetic(|_| 2.5), (0.0, 100.0), None).unwrap();
        assert!(fit.exponent.abs() < 1e-14);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn log_corrected_power_law() {
        let s = synthetic(|t| (1.0 + t).powf(-0.125) * (3.0 + t).ln().powi(3));
        let fit = fit_decay(&s, (0.0, 100.0), Some(3.0)).unwrap();
        assert!((fit.exponent + 0.125).abs() < 1e-9);
    }

    #[test]
    fn non_positive_values_are_degenerate() {
        let s = synthetic(|t| if t > 10.0 { 0.0 } else { 1.0 });
        assert!(matches!(fit_decay(&s, (0.0, 100.0), None), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn peak_detection() {
        assert_eq!(non_increasing_after_peak(&[1.0, 3.0, 2.0, 2.05, 1.0], 0.05), (1, true));
        assert_eq!(non_increasing_after_peak(&[1.0, 3.0, 2.0, 2.5], 0.05), (1, false));
    }

    #[test]
    fn csv_has_header_comment() {
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &[synthetic(|t| 1.0 / t)], "abc").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# burgers2d "));
        assert_eq!(lines.next().unwrap(), "t,norm_name,p,value");
        assert_eq!(lines.next().unwrap(), "1,synthetic,2,1e0");
    }

    #[test]
    fn ladder_ends_on_request() {
        assert_eq!(time_ladder(1.0, 100.0), vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0]);
        assert_eq!(time_ladder(4.0, 64.0), vec![4.0, 8.0, 16.0, 32.0, 64.0]);
    }
}
