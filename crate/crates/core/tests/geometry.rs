use burgers2d::geometry::{mollifier, CurvatureSupport, IMPLICIT_TOL};
use burgers2d::{Curve, CurveKind, Error};
use proptest::prelude::*;

fn polyline_strategy() -> impl Strategy<Value = Curve> {
    (-2.0..0.8f64, -1.0..1.0f64, -2.0..0.8f64, -1.0..1.0f64, 0.5..3.0f64)
        .prop_filter_map("admissible", |(k1, c1, k2, c2, e)| Curve::mollify_polyline(k1, c1, k2, c2, e).ok())
}

fn perturbed_strategy() -> impl Strategy<Value = Curve> {
    (-1.5..0.5f64, -1.0..1.0f64, -0.9..0.9f64, 0.3..3.0f64)
        .prop_filter_map("admissible", |(k, c, a, w)| Curve::perturbed_line(k, c, a * (1.0 - k) * w, w).ok())
}

fn curve_strategy() -> impl Strategy<Value = Curve> {
    prop_oneof![polyline_strategy(), perturbed_strategy(), (-3.0..0.9f64, -2.0..2.0f64).prop_map(|(k, c)| Curve::line(k, c).unwrap())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn z_solves_its_equation(curve in curve_strategy(), x in -50.0..50.0f64, y in -50.0..50.0f64) {
        let r = curve.solve_z(x, y, IMPLICIT_TOL).unwrap();
        let z = r.value;
        prop_assert!((y - z - curve.phi(x - z)).abs() <= 1e-11 * (1.0 + y.abs()));
        let d = curve.dz_at(x, z);
        prop_assert!((d.zx + d.zy - 1.0).abs() <= 1e-12);
        prop_assert!((x - z - curve.g(x - y).unwrap()).abs() <= 1e-9);
        let s = y - curve.phi(x);
        prop_assert!(s == 0.0 || z.signum() == s.signum());
    }

    #[test]
    fn margin_bounds_every_slope(curve in curve_strategy(), x in -60.0..60.0f64) {
        prop_assert!(1.0 - curve.eval(x).dphi >= curve.d0() * (1.0 - 1e-9));
    }

    #[test]
    fn g_prime_matches_difference(curve in curve_strategy(), xi in -20.0..20.0f64) {
        let h = 1e-5;
        let fd = (curve.g(xi + h).unwrap() - curve.g(xi - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - curve.g_prime(xi).unwrap()).abs() <= 1e-6 * (1.0 + fd.abs()));
    }

    #[test]
    fn polyline_is_exact_outside_the_mollifier(
        (k1, c1, k2, c2, e) in (-2.0..0.8f64, -1.0..1.0f64, -2.0..0.8f64, -1.0..1.0f64, 0.5..3.0f64),
        s in 1.0..40.0f64,
    ) {
        if let Ok(curve) = Curve::mollify_polyline(k1, c1, k2, c2, e) {
            let (l, r) = (-e - s, e + s);
            prop_assert!((curve.phi(l) - (k1 * l + c1)).abs() <= 1e-12 * (1.0 + l.abs()));
            prop_assert!((curve.phi(r) - (k2 * r + c2)).abs() <= 1e-12 * (1.0 + r.abs()));
            prop_assert_eq!(curve.eval(r).ddphi, 0.0);
        }
    }

    #[test]
    fn shift_moves_the_curve(curve in curve_strategy(), m in -3.0..3.0f64, x in -10.0..10.0f64) {
        prop_assert!((curve.shifted(m).phi(x) - curve.phi(x) - m).abs() <= 1e-12 * (1.0 + curve.phi(x).abs()));
    }
}

#[test]
fn polyline_derivatives_match_differences() {
    let c = Curve::mollify_polyline(-0.5, 0.3, 0.4, -0.2, 1.5).unwrap();
    let h = 1e-5;
    for i in 0..61 {
        let x = -2.0 + i as f64 / 15.0;
        let j = c.eval(x);
        let d1 = (c.phi(x + h) - c.phi(x - h)) / (2.0 * h);
        let d2 = (c.eval(x + h).dphi - c.eval(x - h).dphi) / (2.0 * h);
        assert!((d1 - j.dphi).abs() < 1e-8, "phi' at {x}");
        assert!((d2 - j.ddphi).abs() < 1e-6, "phi'' at {x}");
    }
}

#[test]
fn mollifier_has_unit_mass_and_zero_mean() {
    let m = mollifier();
    assert!((m.cumulative(1.0) - 1.0).abs() < 1e-14);
    assert_eq!(m.cumulative(-1.0), 0.0);
    assert!(m.first_moment(1.0).abs() < 1e-14);
    assert!((m.cumulative(0.0) - 0.5).abs() < 1e-14);
}

#[test]
fn degenerate_constructions_reduce_to_lines() {
    let a = Curve::mollify_polyline(0.3, 1.0, 0.3, 1.0, 2.0).unwrap();
    assert_eq!(a.kind(), CurveKind::Line { k: 0.3, c: 1.0 });
    let b = Curve::perturbed_line(0.3, 1.0, 0.0, 2.0).unwrap();
    assert_eq!(b.kind(), CurveKind::Line { k: 0.3, c: 1.0 });
    assert_eq!(a.curvature_support(), CurvatureSupport::Empty);
}

#[test]
fn steep_curves_are_rejected() {
    assert!(matches!(Curve::line(1.0, 0.0), Err(Error::HyperbolicityViolated { .. })));
    assert!(matches!(Curve::mollify_polyline(0.0, 0.0, 1.2, 0.0, 1.0), Err(Error::HyperbolicityViolated { .. })));
    // a steep step: the smoothed jump slope exceeds one
    assert!(matches!(Curve::mollify_polyline(0.0, 0.0, 0.0, 5.0, 0.5), Err(Error::HyperbolicityViolated { .. })));
    assert!(matches!(Curve::perturbed_line(0.0, 0.0, 2.0, 1.0), Err(Error::HyperbolicityViolated { .. })));
    assert!(matches!(Curve::mollify_polyline(0.0, 0.0, 0.5, 0.0, 0.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn line_has_closed_form_z() {
    let c = Curve::line(-1.0, 2.0).unwrap();
    // y - Z = -(x - Z) + 2  =>  Z = (x + y - 2) / 2
    let z = c.z(3.0, 5.0).unwrap();
    assert!((z - 3.0).abs() < 1e-15);
    assert_eq!(c.d0(), 2.0);
}
