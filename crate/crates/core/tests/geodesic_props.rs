use holgeo::geodesic::{shoot, GeodesicGerm, GeodesicMetric};
use holgeo::metric::WarpedSpec;
use holgeo::{ComplexPath, Expr, IntegratorConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn positive(var: usize) -> impl Strategy<Value = Expr> {
    (0..4usize, 0.2..1.0f64).prop_map(move |(kind, k)| {
        let x = Expr::var(var);
        match kind {
            0 => (Expr::real(k) * x).exp(),
            1 => Expr::real(1.0) + Expr::real(k) * x.powi(2),
            2 => (Expr::real(k) * x).cosh(),
            _ => Expr::real(1.0 + k),
        }
    })
}

fn warped() -> impl Strategy<Value = WarpedSpec> {
    (
        positive(0),
        positive(0),
        positive(0),
        positive(1),
        positive(2),
    )
        .prop_map(|(b1, a2, a3, f2, f3)| WarpedSpec::new(b1, vec![a2, a3], vec![f2, f3]).unwrap())
}

fn real_germ() -> impl Strategy<Value = GeodesicGerm> {
    (
        proptest::collection::vec(-0.5..0.5f64, 3),
        proptest::collection::vec(-0.5..0.5f64, 3),
    )
        .prop_map(|(p, v)| GeodesicGerm::real(0.0, &p, &v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn first_integrals_are_conserved(w in warped(), g in real_germ(), len in 1.0..5.0f64) {
        let path = ComplexPath::line(Complex64::new(0.0, 0.0), Complex64::new(len, 0.0)).unwrap();
        let shot = shoot(&GeodesicMetric::Warped(w), &g, &path, &IntegratorConfig::default()).unwrap();
        prop_assume!(shot.trajectory.termination.is_completed());
        prop_assert!(shot.max_drift() <= 1e-8, "{}", shot.max_drift());
    }

    #[test]
    fn tighter_tolerance_agrees(w in warped(), g in real_germ()) {
        let m = GeodesicMetric::Warped(w);
        let path = ComplexPath::polyline(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.3), Complex64::new(2.0, 0.0)]).unwrap();
        let a = shoot(&m, &g, &path, &IntegratorConfig::default()).unwrap();
        let b = shoot(&m, &g, &path, &IntegratorConfig::default().with_rel_tol(1e-12)).unwrap();
        prop_assume!(a.trajectory.termination.is_completed() && b.trajectory.termination.is_completed());
        for (x, y) in a.final_position().iter().zip(b.final_position()) {
            prop_assert!((x - y).norm() <= 1e-8 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn real_data_stays_real(w in warped(), g in real_germ(), len in 0.5..3.0f64) {
        let path = ComplexPath::line(Complex64::new(0.0, 0.0), Complex64::new(len, 0.0)).unwrap();
        let shot = shoot(&GeodesicMetric::Warped(w), &g, &path, &IntegratorConfig::default()).unwrap();
        for s in &shot.trajectory.samples {
            for x in &s.w {
                prop_assert!(x.im.abs() <= 1e-10);
            }
        }
    }
}
