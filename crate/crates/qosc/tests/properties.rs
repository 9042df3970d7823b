//! Property tests over random parameter points.

use std::f64::consts::PI;

use proptest::prelude::*;
use qosc::fock::braces::{brace, BraceMethod};
use qosc::fock::weight_v;
use qosc::modular::{faddeev_functional_check, weight_v_modular, ModularContext};
use qosc::orthopoly::{poly_p, PolyEvalMethod};
use qosc::qseries::{qpoch, theta, theta_check, ThetaKind};
use qosc::report::{rel_residual, IdentityReport, Params};
use qosc::vgamma::{GammaContext, KMWeightSet};
use qosc::{QContext, Verdict, C};

fn polar() -> impl Strategy<Value = (f64, f64)> {
    (0.6f64..1.6, -1.0f64..1.0)
}

fn nome() -> impl Strategy<Value = f64> {
    prop_oneof![0.2f64..0.6, -0.5f64..-0.2]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_sum_equals_product(q in nome(), (r, t) in polar(), k in 0usize..5) {
        let ctx = QContext::real(q).unwrap();
        let r = theta_check(ThetaKind::ALL[k], C::from_polar(r, t), &ctx).unwrap();
        prop_assert!(r.passed(), "{}", r.residual);
    }

    #[test]
    fn theta4_is_inversion_symmetric(q in 0.2f64..0.6, (r, t) in polar()) {
        let ctx = QContext::real(q).unwrap();
        let u = C::from_polar(r, t);
        let a = theta(ThetaKind::Theta4, u, &ctx).unwrap();
        let b = theta(ThetaKind::Theta4, u.inv(), &ctx).unwrap();
        prop_assert!(rel_residual(a, b) < 1e-10);
    }

    #[test]
    fn finite_pochhammer_splits(q in nome(), (r, t) in polar(), n in -6i64..6, m in 0i64..6) {
        let (x, q) = (C::from_polar(r, t) * 0.5, C::new(q, 0.0));
        let whole = qpoch(x, q, n + m);
        let split = qpoch(x, q, n) * qpoch(x * q.powi(n as i32), q, m);
        prop_assert!(rel_residual(whole, split) < 1e-10);
    }

    #[test]
    fn polynomial_methods_agree(q in 0.25f64..0.6, (r, t) in polar(), n in 0usize..8) {
        let ctx = QContext::real(q).unwrap();
        let xi = C::from_polar(r, t);
        let base = poly_p(n, xi, PolyEvalMethod::ALL[0], &ctx).unwrap();
        for m in PolyEvalMethod::ALL {
            let v = poly_p(n, xi, m, &ctx).unwrap();
            prop_assert!(rel_residual(v, base) < 1e-9, "{m:?}: {v} vs {base}");
        }
        // P_n(xi) = P_n(1/xi)
        let inv = poly_p(n, xi.inv(), PolyEvalMethod::ALL[0], &ctx).unwrap();
        prop_assert!(rel_residual(inv, base) < 1e-9);
    }

    #[test]
    fn braces_are_symmetric(q in 0.25f64..0.6, a in 0usize..5, b in 0usize..5, c in 0usize..5) {
        let ctx = QContext::real(q).unwrap();
        let v = brace(a, b, c, BraceMethod::ClosedForm, &ctx).unwrap();
        for (x, y, z) in [(b, a, c), (c, b, a), (a, c, b)] {
            let w = brace(x, y, z, BraceMethod::ClosedForm, &ctx).unwrap();
            prop_assert!(rel_residual(v, w) < 1e-12);
        }
        let r = brace(a, b, c, BraceMethod::Recursion, &ctx).unwrap();
        prop_assert!(rel_residual(v, r) < 1e-10);
    }

    #[test]
    fn fock_weight_is_symmetric(q in 0.25f64..0.6, (r, t) in polar(), m in 0i64..6, mp in 0i64..6) {
        let ctx = QContext::real(q).unwrap();
        let x = C::from_polar(r, t);
        let a = weight_v(x, m, mp, &ctx).unwrap();
        let b = weight_v(x, mp, m, &ctx).unwrap();
        prop_assert!(rel_residual(a, b) < 1e-10);
    }

    #[test]
    fn bold_weight_is_one_at_q(two_nu in -1i32..=1, m in -5i64..5, mp in -5i64..5) {
        let ctx = QContext::real(0.4).unwrap();
        let w = KMWeightSet::new(GammaContext::selected(two_nu, 40, &ctx).unwrap());
        let v = w.v_bold(ctx.q(), m, mp, &ctx).unwrap();
        prop_assert!((v - C::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn verdict_follows_residual(residual in 0.0f64..1.0, tol in 1e-12f64..1.0) {
        let r = IdentityReport::check("prop.check", Params::new(), residual, tol);
        prop_assert_eq!(r.verdict == Verdict::Pass, residual <= tol);
        let n = IdentityReport::negative_control("prop.control", Params::new(), residual, tol);
        prop_assert_eq!(n.verdict == Verdict::ExpectedFail, residual > 10.0 * tol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn faddeev_difference_equations(theta in 0.3f64..1.2, re in -0.8f64..0.8, im in -0.2f64..0.2, dual: bool) {
        let mc = ModularContext::new(theta).unwrap();
        let r = faddeev_functional_check(C::new(re, im), dual, &mc).unwrap();
        prop_assert!(r.passed(), "{}", r.residual);
    }

    #[test]
    fn hyperbolic_weight_is_symmetric(mu in 0.1f64..0.35, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let mc = ModularContext::new(PI / 5.0).unwrap();
        let v = |a: f64, b: f64| weight_v_modular(C::new(0.0, mu), C::new(a, 0.0), C::new(b, 0.0), &mc).unwrap();
        let base = v(x, y);
        prop_assert!(rel_residual(v(y, x), base) < 1e-9);
        prop_assert!(rel_residual(v(-x, y), base) < 1e-9);
    }
}
