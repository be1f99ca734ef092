//! Command-line harness behind the `burgers2d` binary.
//!
//! Every command reads a [`RunConfig`], writes its artefacts under the
//! output directory and prints a short summary. Exit codes: 0 success,
//! 2 configuration error, 3 numerical failure, 4 failed assertion.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    experiment_curve_stability, experiment_main_theorem, experiment_perturbation_norms, fit_decay, write_series_csv,
    DecaySeries, PerturbedRun, RateFit, Report,
};
use crate::config::{BoundaryKind, Coords, RunConfig};
use crate::error::{Error, Result};
use crate::exactwave::{compare_waves, eval_rarefaction, wave_differences, RiemannData, SampleSet};
use crate::geometry::{Curve, IMPLICIT_TOL};
use crate::plot::loglog_svg;
use crate::profiles::ViscousProfile;
use crate::solver::{
    initial_field, run, Boundary, Field2D, Reference, ReferenceKind, SolverConfig, Stepper,
};
use crate::transform::{coefficient_bounds, coefficient_profile, eval_kab, from_transformed, to_transformed, CoeffSample};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ASSERTION: i32 = 4;

/// Grids with at most this many nodes are also written as CSV.
const CSV_NODE_LIMIT: usize = 20_000;

#[derive(Debug, Parser)]
#[command(name = "burgers2d", version, about = "Rarefaction waves of the 2D Burgers equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (overrides `workers` in the config).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Also write SVG log-log plots.
    #[arg(long, global = true)]
    pub plots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Dump the inviscid wave at the configured times.
    Construct,
    /// Decay norms of the viscous profile and the coefficient profile.
    Profile,
    /// Run the solver and record norms against the reference wave.
    Simulate,
    /// Decay experiment: main theorem (original coordinates) or
    /// perturbation norms (transformed coordinates).
    Decay,
    /// Stability of the wave under a change of curve.
    CompareCurves,
    /// Property suite over every module.
    Verify,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Self { summary, passed: true }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::HyperbolicityViolated { .. } | Error::InvalidArgument(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            print!("{}", o.summary);
            if o.passed {
                EXIT_OK
            } else {
                eprintln!("assertion failed");
                EXIT_ASSERTION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let path = cli.config.as_ref().ok_or_else(|| Error::config("--config", "missing required flag"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    fs::create_dir_all(&cfg.out)?;
    pool.install(|| match cli.command {
        Command::Construct => cmd_construct(&cfg),
        Command::Profile => cmd_profile(&cfg, cli.plots),
        Command::Simulate => cmd_simulate(&cfg, cli.plots),
        Command::Decay => cmd_decay(&cfg, cli.plots),
        Command::CompareCurves => cmd_compare_curves(&cfg, cli.plots),
        Command::Verify => cmd_verify(&cfg, &VerifyOptions::default()),
    })
}

fn header(cfg: &RunConfig) -> String {
    format!("# burgers2d {} config={}", env!("CARGO_PKG_VERSION"), cfg.hash)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn time_tag(t: f64) -> String {
    format!("{t}").replace('.', "p")
}

fn write_field(cfg: &RunConfig, field: &Field2D, stem: &str) -> Result<()> {
    field.save_dump(&cfg.out.join(format!("{stem}.bin")))?;
    if field.grid.len() <= CSV_NODE_LIMIT {
        let mut w = create(&cfg.out.join(format!("{stem}.csv")))?;
        writeln!(w, "{}", header(cfg))?;
        field.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn write_series(cfg: &RunConfig, series: &[DecaySeries], name: &str) -> Result<()> {
    let mut w = create(&cfg.out.join(name))?;
    write_series_csv(&mut w, series, &cfg.hash)?;
    w.flush()?;
    Ok(())
}

fn write_plot(cfg: &RunConfig, name: &str, title: &str, series: &[DecaySeries], fits: &[Option<RateFit>]) -> Result<()> {
    fs::write(cfg.out.join(name), loglog_svg(title, series, fits))?;
    Ok(())
}

fn write_report(cfg: &RunConfig, report: &mut Report, stem: &str, plots: bool) -> Result<Outcome> {
    report.config_hash = cfg.hash.clone();
    write_series(cfg, &report.series, &format!("{stem}.csv"))?;
    let summary = report.summary();
    fs::write(cfg.out.join(format!("{stem}.txt")), &summary)?;
    if plots {
        let fits: Vec<Option<RateFit>> = report
            .series
            .iter()
            .map(|s| fit_decay(s, cfg.experiment.fit_window, None).ok())
            .collect();
        write_plot(cfg, &format!("{stem}.svg"), &report.title, &report.series, &fits)?;
    }
    Ok(Outcome { summary, passed: report.passed() })
}

pub fn cmd_construct(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg.require_grid()?;
    let mut summary = format!("construct: {} times on {} x {} nodes\n", cfg.experiment.times.len(), grid.n1, grid.n2);
    for &t in &cfg.experiment.times {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| eval_rarefaction(&cfg.data, t, grid.x(k % grid.n1), grid.y(k / grid.n1)))
            .collect::<Result<Vec<f64>>>()?;
        let field = Field2D::new(grid, t, values)?;
        let stem = format!("wave_t{}", time_tag(t));
        write_field(cfg, &field, &stem)?;
        let (lo, hi) = field.min_max();
        summary.push_str(&format!("t = {t}: range [{lo:.6}, {hi:.6}] -> {stem}.bin\n"));
    }
    Ok(Outcome::ok(summary))
}

pub fn cmd_profile(cfg: &RunConfig, plots: bool) -> Result<Outcome> {
    let profile = ViscousProfile::new(cfg.data.u_minus, cfg.data.u_plus)?;
    let series = profile.measure_profile_decay(&cfg.curve, &cfg.experiment.times, &cfg.profile)?;
    write_series(cfg, &series, "profile_decay.csv")?;

    let (lo, hi) = cfg.profile.xi;
    let coeffs = coefficient_profile(&cfg.curve, lo, hi, 401)?;
    let mut w = create(&cfg.out.join("coefficients.csv"))?;
    writeln!(w, "{}", header(cfg))?;
    writeln!(w, "xi,K,A,B,Kprime")?;
    for c in &coeffs {
        writeln!(w, "{},{:e},{:e},{:e},{:e}", c.xi, c.k, c.a, c.b, c.k_prime)?;
    }
    w.flush()?;

    let window = (cfg.experiment.times[0], *cfg.experiment.times.last().expect("times validated non-empty"));
    let mut summary = format!("profile: xi in [{lo:.4}, {hi:.4}], eta in [{}, {}]\n", cfg.profile.eta.0, cfg.profile.eta.1);
    let mut fits = Vec::new();
    for s in &series {
        let q = if s.label.starts_with("v_xi") { Some(1.0) } else { None };
        let fit = fit_decay(s, window, q).ok();
        match &fit {
            Some(f) => summary.push_str(&format!("{} p={}: exponent {:.4} (r2 {:.4})\n", s.label, s.p_label(), f.exponent, f.r2)),
            None => summary.push_str(&format!("{} p={}: no fit\n", s.label, s.p_label())),
        }
        fits.push(fit);
    }
    if plots {
        write_plot(cfg, "profile_decay.svg", "profile decay", &series, &fits)?;
    }
    Ok(Outcome::ok(summary))
}

fn stepper_for(cfg: &RunConfig) -> Result<Stepper> {
    let grid = cfg.require_grid()?;
    Ok(match cfg.solver.coords {
        Coords::Original => Stepper::original(grid, cfg.solver.advection),
        Coords::Transformed => Stepper::transformed(grid, cfg.curve, cfg.solver.advection)?,
    })
}

pub fn cmd_simulate(cfg: &RunConfig, plots: bool) -> Result<Outcome> {
    let stepper = stepper_for(cfg)?;
    let kind = match cfg.solver.coords {
        Coords::Original => ReferenceKind::Exact,
        Coords::Transformed => ReferenceKind::Viscous(ViscousProfile::new(cfg.data.u_minus, cfg.data.u_plus)?),
    };
    let reference = Reference::new(cfg.data, kind, &stepper)?;
    let boundary = match cfg.solver.boundary {
        BoundaryKind::Frozen => Boundary::Frozen,
        BoundaryKind::Exact => Boundary::Dirichlet(Reference::new(cfg.data, ReferenceKind::Exact, &stepper)?),
        BoundaryKind::Viscous => Boundary::Dirichlet(Reference::new(
            cfg.data,
            ReferenceKind::Viscous(ViscousProfile::new(cfg.data.u_minus, cfg.data.u_plus)?),
            &stepper,
        )?),
    };
    let initial = initial_field(&stepper, &cfg.data, cfg.perturbation.as_ref(), 0.0)?;
    let config = SolverConfig {
        scheme: cfg.solver.scheme,
        cfl: cfg.solver.cfl,
        end_time: *cfg.experiment.times.last().expect("times validated non-empty"),
        snapshots: cfg.experiment.times.clone(),
        norms: vec![f64::INFINITY, 2.0, 6.0, 8.0],
        boundary_refresh: cfg.solver.boundary_refresh,
        keep_fields: true,
    };
    let out = run(&stepper, initial, &config, &boundary, Some(&reference))?;
    for f in &out.snapshots {
        write_field(cfg, f, &format!("field_t{}", time_tag(f.time)))?;
    }
    write_series(cfg, &out.series, "simulate_norms.csv")?;
    let mut summary = format!(
        "simulate: {} steps of dt = {:.6e}, max-principle excursion {:.3e}\n",
        out.steps, out.dt, out.max_principle_excess
    );
    for s in &out.series {
        let last = s.samples.last().map(|x| x.1).unwrap_or(f64::NAN);
        summary.push_str(&format!("{} p={}: final {last:.6e}\n", s.label, s.p_label()));
    }
    if plots {
        let fits: Vec<Option<RateFit>> = out.series.iter().map(|s| fit_decay(s, cfg.experiment.fit_window, None).ok()).collect();
        write_plot(cfg, "simulate_norms.svg", "solution minus reference", &out.series, &fits)?;
    }
    Ok(Outcome::ok(summary))
}

pub fn cmd_decay(cfg: &RunConfig, plots: bool) -> Result<Outcome> {
    let mut setup = PerturbedRun::new(cfg.data, cfg.perturbation, cfg.require_grid()?, cfg.experiment.times.clone());
    setup.fit_window = cfg.experiment.fit_window;
    setup.advection = cfg.solver.advection;
    setup.cfl = cfg.solver.cfl;
    setup.boundary_refresh = cfg.solver.boundary_refresh;
    let (mut report, stem) = match cfg.solver.coords {
        Coords::Original => (experiment_main_theorem(&setup, cfg.experiment.target_exponent)?, "main_theorem"),
        Coords::Transformed => (experiment_perturbation_norms(&setup)?, "perturbation_norms"),
    };
    write_report(cfg, &mut report, stem, plots)
}

pub fn cmd_compare_curves(cfg: &RunConfig, plots: bool) -> Result<Outcome> {
    let other = RiemannData::new(cfg.data.u_minus, cfg.data.u_plus, cfg.require_curve2()?)?;
    let mut report =
        experiment_curve_stability(&cfg.data, &other, &cfg.experiment.times, cfg.experiment.sample_x, cfg.experiment.samples)?;
    write_report(cfg, &mut report, "curve_stability", plots)
}

/// Fault injection for the verify suite.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    /// Replace `A` by this value at one sample of the Line coefficient check.
    pub tamper_a: Option<f64>,
}

struct Ledger {
    lines: Vec<(String, bool, String)>,
}

impl Ledger {
    fn record(&mut self, name: &str, result: Result<String>) {
        match result {
            Ok(detail) => self.lines.push((name.into(), true, detail)),
            Err(e) => self.lines.push((name.into(), false, e.to_string())),
        }
    }
}

fn assertion(ok: bool, detail: String) -> Result<String> {
    if ok {
        Ok(detail)
    } else {
        Err(Error::InvalidArgument(detail))
    }
}

fn identity_residual(samples: &[CoeffSample]) -> f64 {
    samples.iter().fold(0.0, |m: f64, c| m.max((c.a * c.a - 8.0 * c.k + 4.0).abs()))
}

/// Draws until the curve is admissible.
fn random_curve(rng: &mut ChaCha8Rng) -> Curve {
    loop {
        if let Ok(c) = draw_curve(rng) {
            return c;
        }
    }
}

fn draw_curve(rng: &mut ChaCha8Rng) -> Result<Curve> {
    if rng.gen_bool(0.5) {
        Curve::mollify_polyline(
            rng.gen_range(-2.0..0.9),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-2.0..0.9),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..3.0),
        )
    } else {
        let k = rng.gen_range(-1.5..0.3);
        let width = rng.gen_range(0.5..3.0);
        let amp = rng.gen_range(-1.0..1.0) * (0.9 - k) * width;
        Curve::perturbed_line(k, rng.gen_range(-1.0..1.0), amp, width)
    }
}

/// Runs the property suite on the configured curve and random curves
/// drawn from the configured seed.
pub fn cmd_verify(cfg: &RunConfig, options: &VerifyOptions) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ledger = Ledger { lines: Vec::new() };
    let curve = cfg.curve;

    let mut curves = vec![curve];
    for _ in 0..10 {
        curves.push(random_curve(&mut rng));
    }
    ledger.record("coefficient identity A^2 - 8K = -4", (|| {
        let mut worst: f64 = 0.0;
        for c in &curves {
            let (lo, hi) = c.xi_strip().map_or((-10.0, 10.0), |(a, b)| (a - 10.0, b + 10.0));
            let xs: Vec<f64> = (0..1000).map(|_| rng.gen_range(lo..hi)).collect();
            let samples = xs.iter().map(|&x| eval_kab(c, x)).collect::<Result<Vec<_>>>()?;
            worst = worst.max(identity_residual(&samples));
        }
        assertion(worst <= 1e-12, format!("max residual {worst:.3e} over {} curves", curves.len()))
    })());

    ledger.record("line coefficients", (|| {
        let line = Curve::line(0.0, 0.0)?;
        let mut samples = coefficient_profile(&line, -5.0, 5.0, 101)?;
        if let Some(a) = options.tamper_a {
            samples[50].a = a;
        }
        let r = identity_residual(&samples);
        assertion(r <= 1e-12, format!("max |A^2 - 8K + 4| = {r:.3e}"))
    })());

    let b = coefficient_bounds(&curve);
    ledger.record(
        "ellipticity",
        assertion(b.d > 0.0 && b.k_min > 0.0, format!("d = {:.6}, K in [{:.6}, {:.6}]", b.d, b.k_min, b.k_max)),
    );

    let points: Vec<(f64, f64)> = (0..10_000).map(|_| (rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0))).collect();
    ledger.record("implicit functions Z and G", (|| {
        let worst = points
            .par_iter()
            .map(|&(x, y)| -> Result<f64> {
                let z = curve.solve_z(x, y, IMPLICIT_TOL)?;
                let g = curve.solve_g(x - y, IMPLICIT_TOL)?;
                let d = curve.dz_at(x, z.value);
                let sign_ok = z.value.signum() == (y - curve.phi(x)).signum() || z.value == 0.0;
                let identity = (d.zx + d.zy - 1.0).abs().max((x - z.value - curve.g(x - y)?).abs());
                Ok(if sign_ok { identity.max(z.residual.abs() * 1e3).max(g.residual.abs() * 1e3) } else { f64::INFINITY })
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        assertion(worst <= 1e-9, format!("max identity error {worst:.3e} at {} points", points.len()))
    })());

    ledger.record("coordinate round trip", (|| {
        let worst = points[..1000]
            .iter()
            .map(|&(x, y)| -> Result<f64> {
                let (xi, eta) = to_transformed(&curve, x, y)?;
                let (x2, y2) = from_transformed(&curve, xi, eta)?;
                Ok((x2 - x).abs().max((y2 - y).abs()))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        assertion(worst <= 1e-10, format!("max round-trip error {worst:.3e}"))
    })());

    let shifted = cfg.data.shifted(1.0);
    ledger.record("comparison under an upward shift", (|| {
        let mut worst: f64 = f64::NEG_INFINITY;
        for t in [1.0, 2.0, 4.0, 8.0] {
            let s = SampleSet::around_fans(&[cfg.data, shifted], t, cfg.experiment.sample_x, 64);
            let d = wave_differences(&shifted, &cfg.data, t, &s)?;
            worst = d.iter().fold(worst, |m, &v| m.max(v));
        }
        assertion(worst <= 1e-10, format!("max (u_shifted - u) = {worst:.3e}"))
    })());

    ledger.record("shift bound M / (d0 t)", (|| {
        let mut ratio: f64 = 0.0;
        for t in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let s = SampleSet::around_fans(&[cfg.data, shifted], t, cfg.experiment.sample_x, 64);
            let sup = compare_waves(&cfg.data, &shifted, t, &s)?;
            ratio = ratio.max(sup * curve.d0() * t);
        }
        assertion(ratio <= 1.0 + 1e-6, format!("max sup * d0 * t / M = {ratio:.6}"))
    })());

    ledger.record("viscous profile monotone and bounded", (|| {
        let profile = ViscousProfile::new(cfg.data.u_minus, cfg.data.u_plus)?;
        let (lo, hi) = (cfg.data.u_minus, cfg.data.u_plus);
        let mut ok = true;
        for t in [1.0, 4.0] {
            for k in [0.5, 1.0, 2.0] {
                for j in 0..41 {
                    let eta = -20.0 + j as f64;
                    let hc = profile.hopf_cole(t, k, eta)?;
                    ok &= hc.v_eta > 0.0 && hc.v > lo && hc.v < hi;
                }
            }
        }
        assertion(ok, "v_eta > 0 and u- < v < u+ on the sample".into())
    })());

    let rejected = match Curve::line(1.0, 0.0) {
        Err(Error::HyperbolicityViolated { margin, .. }) => Ok(format!("margin {margin}")),
        other => assertion(false, format!("unexpected {other:?}")),
    };
    ledger.record("non-hyperbolic curve rejected", rejected);

    let passed = ledger.lines.iter().all(|l| l.1);
    let mut summary = format!("verify: config {}\n", cfg.hash);
    for (name, ok, detail) in &ledger.lines {
        summary.push_str(&format!("[{}] {name}: {detail}\n", if *ok { "PASS" } else { "FAIL" }));
    }
    fs::write(cfg.out.join("verify.txt"), &summary)?;
    Ok(Outcome { summary, passed })
}
