use foldwave_core::cubic::Cubic;
use foldwave_core::equilibria::eigenvalues;
use foldwave_core::model::{
    coeffs_slow, coeffs_time, potential, restoring_force, Forcing, SlowFastCoefficients,
};
use foldwave_core::{BeamFoundationParams, SlowPhase};
use proptest::prelude::*;

fn coefficient() -> impl Strategy<Value = f64> {
    prop_oneof![-10.0..10.0f64, -1e-3..1e-3f64]
}

proptest! {
    #[test]
    fn cubic_roots_are_roots_and_match_discriminant(
        a0 in coefficient(), a1 in coefficient(), a2 in coefficient(),
        a3 in prop_oneof![0.1..10.0f64, -10.0..-0.1f64],
    ) {
        let c = Cubic([a0, a1, a2, a3]);
        let roots = c.roots();
        for r in &roots {
            prop_assert!(c.eval(r.value).abs() <= 1e-9 * c.magnitude(r.value).max(1.0));
        }
        let disc = 18.0 * a3 * a2 * a1 * a0 - 4.0 * a2.powi(3) * a0 + a2 * a2 * a1 * a1
            - 4.0 * a3 * a1.powi(3) - 27.0 * a3 * a3 * a0 * a0;
        let scale = (a3.abs() * a0.abs() + a2.abs() * a1.abs()).powi(2)
            + (a2.abs().powi(3) * a0.abs() + a3.abs() * a1.abs().powi(3));
        if disc > 1e-6 * scale {
            prop_assert_eq!(roots.len(), 3);
        } else if disc < -1e-6 * scale {
            prop_assert_eq!(roots.len(), 1);
        }
        prop_assert!(roots.windows(2).all(|w| w[0].value < w[1].value));
    }

    #[test]
    fn fast_eigenvalues_have_trace_and_determinant(k in -500.0..500.0f64, xi in 0.0..2.0f64) {
        let [l1, l2] = eigenvalues(k, xi);
        let sum = l1 + l2;
        let prod = l1 * l2;
        let tol = 1e-12 * (1.0 + k.abs());
        prop_assert!((sum.re + xi).abs() <= tol && sum.im.abs() <= tol);
        prop_assert!((prod.re - k).abs() <= 1e-10 * (1.0 + k.abs()) && prod.im.abs() <= tol);
    }

    #[test]
    fn potential_gradient_is_minus_restoring_force(
        z in -2.0..2.0f64, f in -5.0..5.0f64, j in -200.0..300.0f64, g in -50.0..50.0f64, gamma in 0.0..200.0f64,
    ) {
        let c = SlowFastCoefficients { forcing: f, stiffness: j, quadratic: g };
        let h = 1e-5;
        let dv = (potential(z + h, &c, gamma, Forcing::Included) - potential(z - h, &c, gamma, Forcing::Included)) / (2.0 * h);
        let r = restoring_force(z, &c, gamma);
        prop_assert!((dv + r).abs() <= 1e-6 * (1.0 + j.abs() + gamma));
    }

    #[test]
    fn slow_form_equals_time_form(
        t in 0.0..700.0f64,
        sigma in -150.0..150.0f64,
        gamma in 0.1..200.0f64,
        h0 in 0.0..0.3f64,
        kappa in prop_oneof![0.1..0.9f64, 1.2..2.9f64, 3.3..6.0f64],
    ) {
        let p = BeamFoundationParams { sigma, gamma, h0, kappa, ..Default::default() };
        let ct = coeffs_time(t, &p).unwrap();
        let cs = coeffs_slow(SlowPhase::from_angle(p.omega * t), &p).unwrap();
        let tol = |x: f64| 1e-9 * (1.0 + x.abs());
        prop_assert!((ct.forcing - cs.forcing).abs() <= tol(ct.forcing));
        prop_assert!((ct.stiffness - cs.stiffness).abs() <= tol(ct.stiffness));
        prop_assert!((ct.quadratic - cs.quadratic).abs() <= tol(ct.quadratic));
    }
}
