use burgers2d::solver::{
    initial_field, run, Advection, Boundary, Bump, Field2D, Grid2D, Reference, ReferenceKind, Scheme, SolverConfig,
    Stepper,
};
use burgers2d::transform::to_transformed;
use burgers2d::{Curve, Error, RiemannData};
use proptest::prelude::*;

fn bilinear(f: &Field2D, x: f64, y: f64) -> f64 {
    let g = f.grid;
    let (sx, sy) = ((x - g.lo1) / g.h1(), (y - g.lo2) / g.h2());
    let (i, j) = ((sx.floor() as usize).min(g.n1 - 2), (sy.floor() as usize).min(g.n2 - 2));
    let (a, b) = (sx - i as f64, sy - j as f64);
    (1.0 - a) * (1.0 - b) * f.get(i, j) + a * (1.0 - b) * f.get(i + 1, j) + (1.0 - a) * b * f.get(i, j + 1) + a * b * f.get(i + 1, j + 1)
}

fn config(end: f64) -> SolverConfig {
    SolverConfig { end_time: end, snapshots: vec![end], norms: vec![f64::INFINITY], ..SolverConfig::default() }
}

fn dirichlet(data: RiemannData, stepper: &Stepper) -> Boundary {
    Boundary::Dirichlet(Reference::new(data, ReferenceKind::Exact, stepper).unwrap())
}

/// Runs the same smooth problem in both coordinate systems and returns the
/// largest difference over a central window.
fn cross_coordinate_gap(n: usize) -> f64 {
    let curve = Curve::mollify_polyline(-0.3, 0.0, 0.3, 0.0, 2.0).unwrap();
    let data = RiemannData::new(-0.5, 0.5, curve).unwrap();
    let bump = Bump { amplitude: 0.3, center: (0.0, 0.0), radius: 4.0 };
    let end = 2.0;

    let og = Grid2D::new((-16.0, 16.0), n, (-16.0, 16.0), n).unwrap();
    let os = Stepper::original(og, Advection::LocalLaxFriedrichs);
    let ou = run(&os, initial_field(&os, &data, Some(&bump), 0.0).unwrap(), &config(end), &dirichlet(data, &os), None)
        .unwrap()
        .final_field;

    let tg = Grid2D::new((-16.0, 16.0), n, (-16.0, 16.0), n).unwrap();
    let ts = Stepper::transformed(tg, curve, Advection::LocalLaxFriedrichs).unwrap();
    assert!(ts.mixed_stencil_monotone());
    let tu = run(&ts, initial_field(&ts, &data, Some(&bump), 0.0).unwrap(), &config(end), &dirichlet(data, &ts), None)
        .unwrap()
        .final_field;

    let mut gap: f64 = 0.0;
    for k in 0..=40 {
        for l in 0..=40 {
            let (x, y) = (-5.0 + k as f64 * 0.25, -5.0 + l as f64 * 0.25);
            let (xi, eta) = to_transformed(&curve, x, y).unwrap();
            gap = gap.max((bilinear(&ou, x, y) - bilinear(&tu, xi, eta)).abs());
        }
    }
    gap
}

#[test]
fn coordinate_systems_agree_and_converge() {
    let (coarse, fine) = (cross_coordinate_gap(65), cross_coordinate_gap(129));
    eprintln!("cross-coordinate gap {coarse:.3e} -> {fine:.3e}");
    assert!(fine < 0.02, "{fine}");
    assert!(fine < 0.6 * coarse, "{coarse} {fine}");
}

#[test]
fn semi_implicit_agrees_with_explicit() {
    let data = RiemannData::new(-1.0, 1.0, Curve::line(0.2, 0.0).unwrap()).unwrap();
    let bump = Bump { amplitude: 0.5, center: (1.0, 0.0), radius: 3.0 };
    let g = Grid2D::new((-12.0, 12.0), 97, (-12.0, 12.0), 97).unwrap();
    let s = Stepper::original(g, Advection::LocalLaxFriedrichs);
    let u0 = initial_field(&s, &data, Some(&bump), 0.0).unwrap();
    let b = dirichlet(data, &s);
    let e = run(&s, u0.clone(), &config(1.5), &b, None).unwrap();
    let mut c = config(1.5);
    c.scheme = Scheme::SemiImplicitDiffusion;
    let i = run(&s, u0, &c, &b, None).unwrap();
    assert!(i.steps < e.steps);
    let gap = e.final_field.values.iter().zip(&i.final_field.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 0.05, "{gap}");
    assert!(i.max_principle_excess <= 1e-12);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let data = RiemannData::new(-1.0, 1.0, Curve::mollify_polyline(-0.5, 0.0, 0.5, 0.0, 1.0).unwrap()).unwrap();
    let bump = Bump { amplitude: 0.4, center: (0.0, 1.0), radius: 2.0 };
    let solve = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let g = Grid2D::new((-10.0, 10.0), 65, (-10.0, 10.0), 65).unwrap();
            let s = Stepper::transformed(g, data.curve, Advection::LocalLaxFriedrichs).unwrap();
            let r = Reference::new(data, ReferenceKind::Exact, &s).unwrap();
            let u0 = initial_field(&s, &data, Some(&bump), 0.0).unwrap();
            run(&s, u0, &config(1.0), &Boundary::Dirichlet(r.clone()), Some(&r)).unwrap()
        })
    };
    let (a, b) = (solve(1), solve(3));
    assert_eq!(a.final_field.values, b.final_field.values);
    assert_eq!(a.series[0].samples, b.series[0].samples);
}

#[test]
fn dump_round_trip_and_rejection() {
    let g = Grid2D::new((-1.0, 2.0), 9, (0.0, 1.0), 8).unwrap();
    let f = Field2D::from_fn(g, 0.75, |x, y| x * y - 0.1);
    let mut buf = Vec::new();
    f.write_dump(&mut buf).unwrap();
    let back = Field2D::read_dump(&buf[..]).unwrap();
    assert_eq!(back.grid, g);
    assert_eq!(back.time, 0.75);
    assert_eq!(back.values, f.values);
    assert!(matches!(Field2D::read_dump(&buf[..buf.len() - 1]), Err(Error::Format(_))));
    assert!(matches!(Field2D::read_dump(&b"t=1 n1=2\n"[..]), Err(Error::Format(_))));
    let mut csv = Vec::new();
    f.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 72);
}

#[test]
fn invalid_settings_are_rejected() {
    let data = RiemannData::new(-1.0, 1.0, Curve::line(0.0, 0.0).unwrap()).unwrap();
    let g = Grid2D::new((-4.0, 4.0), 17, (-4.0, 4.0), 17).unwrap();
    let s = Stepper::original(g, Advection::LocalLaxFriedrichs);
    let u0 = initial_field(&s, &data, None, 0.0).unwrap();
    let mut c = config(1.0);
    c.cfl = 1.5;
    assert!(matches!(run(&s, u0.clone(), &c, &Boundary::Frozen, None), Err(Error::InvalidArgument(_))));
    assert!(run(&s, u0.clone(), &config(1.0), &Boundary::Periodic, None).is_err());
    let other = Field2D::from_fn(Grid2D::new((-4.0, 4.0), 9, (-4.0, 4.0), 10).unwrap(), 0.0, |_, _| 0.0);
    assert!(run(&s, other, &config(1.0), &Boundary::Frozen, None).is_err());
    assert!(Grid2D::new((1.0, 0.0), 5, (0.0, 1.0), 5).is_err());
}

#[test]
fn periodic_heat_mode_decays_at_the_right_rate() {
    // u = a sin(x) + a sin(y) with small a: nearly linear diffusion, decay e^{-t}
    let n = 129;
    let l = 2.0 * std::f64::consts::PI;
    let g = Grid2D::new((0.0, l), n, (0.0, l), n).unwrap();
    let s = Stepper::original(g, Advection::Centered).with_periodic(true);
    let a = 1e-6;
    let u0 = Field2D::from_fn(g, 0.0, |x, y| a * (x.sin() + y.sin()));
    let out = run(&s, u0, &config(0.5), &Boundary::Periodic, None).unwrap();
    let ratio = out.final_field.get(n / 4, 0) / a;
    assert!((ratio - (-0.5f64).exp()).abs() < 1e-3, "{ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn maximum_principle_holds(amp in -1.0..1.0f64, cx in -3.0..3.0f64, cy in -3.0..3.0f64, r in 1.0..4.0f64) {
        let data = RiemannData::new(-1.0, 1.0, Curve::mollify_polyline(-0.5, 0.0, 0.5, 0.0, 1.0).unwrap()).unwrap();
        let bump = Bump { amplitude: amp, center: (cx, cy), radius: r };
        let g = Grid2D::new((-8.0, 8.0), 33, (-8.0, 8.0), 33).unwrap();
        for s in [
            Stepper::original(g, Advection::LocalLaxFriedrichs),
            Stepper::transformed(g, data.curve, Advection::LocalLaxFriedrichs).unwrap(),
        ] {
            let u0 = initial_field(&s, &data, Some(&bump), 0.0).unwrap();
            let out = run(&s, u0, &config(0.5), &dirichlet(data, &s), None).unwrap();
            prop_assert!(out.max_principle_excess <= 1e-12);
        }
    }
}
