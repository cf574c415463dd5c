use proptest::prelude::*;

use ortho_traj::geometry::{fit_conic, sample_curve};
use ortho_traj::model::{orthogonal_foot, LineFamily, Point, Slope, TrajectoryCurve};
use ortho_traj::roots::{real_roots_cubic, slopes_at, CubicCoeffs};

proptest! {
    #[test]
    fn curves_are_mirror_symmetric(c in -6.0..6.0f64, t in -20.0..20.0f64) {
        let curve = TrajectoryCurve::new(c).unwrap();
        let (a, b) = (curve.point(t).unwrap(), curve.point(-t).unwrap());
        prop_assert_eq!(b.x, a.x);
        prop_assert_eq!(b.y, -a.y);
    }

    #[test]
    fn slope_is_reciprocal_parameter(c in -6.0..6.0f64, t in prop_oneof![-20.0..-1e-3f64, 1e-3..20.0f64]) {
        let curve = TrajectoryCurve::new(c).unwrap();
        prop_assume!(curve.speed_factor(t).abs() > 1e-9);
        match curve.slope(t).unwrap() {
            Slope::Finite(s) => prop_assert!((s - 1.0 / t).abs() <= 1e-9 * (1.0 / t).abs().max(1.0)),
            Slope::Vertical => prop_assert!(false, "vertical slope at t = {}", t),
        }
    }

    #[test]
    fn foot_lies_on_line_and_crosses_at_right_angle(m in -3.0..3.0f64, c in -4.0..4.0f64) {
        let fam = LineFamily::cubic();
        let curve = TrajectoryCurve::new(c).unwrap();
        let Ok(foot) = orthogonal_foot(&fam, m, curve) else {
            return Ok(());
        };
        let line = fam.line_at(m).unwrap();
        prop_assert!(line.vertical_offset(foot.point).abs() <= 1e-9);
        prop_assert_eq!(foot.t, -m);
        if m != 0.0 {
            let (vx, vy) = foot.velocity;
            prop_assert!((m * vy / vx + 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn cubic_roots_satisfy_residual_bound(
        a3 in -10.0..10.0f64, a2 in -10.0..10.0f64, a1 in -10.0..10.0f64, a0 in -10.0..10.0f64,
    ) {
        let c = CubicCoeffs { a3, a2, a1, a0 };
        prop_assume!(c.max_abs() > 0.0);
        let rs = real_roots_cubic(c).unwrap();
        prop_assert!(rs.roots().windows(2).all(|w| w[0] < w[1]));
        let scale = [a3, a2, a1, a0].iter().fold(0f64, |m, v| m.max(v.abs()));
        for &r in rs.roots() {
            prop_assert!(c.eval(r).abs() <= 1e-9 * scale * r.abs().max(1.0).powi(3), "root {} of {:?}", r, c);
        }
        prop_assert!(rs.degree_count() <= 3);
    }

    #[test]
    fn slope_count_is_odd_off_the_axis(x in -10.0..10.0f64, y in -10.0..10.0f64) {
        prop_assume!(y.abs() > 1e-6);
        let rs = slopes_at(x, y).unwrap();
        prop_assert!(rs.len() <= 3);
        prop_assert_eq!(rs.degree_count() % 2, 1);
    }

    #[test]
    fn conic_fit_ignores_point_order(c in -4.0..4.0f64, seed in any::<u64>()) {
        let curve = TrajectoryCurve::new(c).unwrap();
        let pts = sample_curve(curve, -3.0, 3.0, 60).unwrap();
        let mut shuffled: Vec<Point> = pts.clone();
        // Deterministic Fisher-Yates from the drawn seed.
        let mut s = seed | 1;
        for i in (1..shuffled.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let (a, b) = (fit_conic(&pts).unwrap(), fit_conic(&shuffled).unwrap());
        prop_assert!((a.residual_rms - b.residual_rms).abs() <= 1e-12);
    }
}

#[test]
fn circle_fits_exactly() {
    let pts: Vec<Point> = (0..50)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / 50.0;
            Point::new(2.0 * a.cos(), 2.0 * a.sin())
        })
        .collect();
    let fit = fit_conic(&pts).unwrap();
    assert!(fit.residual_rms <= 1e-10);
    let [a, b, c, ..] = fit.coeffs;
    assert!((a - c).abs() < 1e-10 && b.abs() < 1e-10);
}
