//! Acceptance suite: one line per criterion on stderr (written past the test
//! harness capture), then a single assertion over all of them.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use qosc::fock::braces::brace_check;
use qosc::fock::rmatrix::box_intertwining_check;
use qosc::fock::spectral::{reg3_check, spectrum_check};
use qosc::fock::vform::{antisymmetric_sum_check, completeness_check};
use qosc::fock::weights::{
    normalisation_check, product_check, star_triangle_fock, symmetry_check, transitivity_check,
};
use qosc::fock::{rll_check, BoxRapidities, FockRepParams, Regularisation, RllVariant, SPIN_CAP};
use qosc::modular::{
    faddeev_functional_check, integral_consistency_check, psi_eigen_check, psi_reality_check,
    summation_check_modular, ModularContext,
};
use qosc::orthopoly::{
    chi_equation_checks, chi_poly_check, genfun_checks, orthogonality_b8_check, poly_p_difference_checks,
    poly_p_methods_check, ChiParams,
};
use qosc::qseries::{
    gauss_check, gauss_double_sum_check, jacobi_transform_check, mf_check, theta_check, theta_constant_check,
    ThetaKind,
};
use qosc::vgamma::{
    brace_gamma_check, central_spin_check, completeness_gamma_check, km_partition_check, parity_vanishing_check,
    projector_check, star_triangle_km, veps_orthogonality_check, GammaContext, KMWeightSet,
};
use qosc::{IdentityReport, QContext, Result, Verdict, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_917;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Outcome of one criterion.
struct Outcome {
    passed: bool,
    detail: String,
}

/// Largest residual over reports that must pass at `tol`.
fn worst(reports: &[IdentityReport]) -> f64 {
    reports.iter().map(|r| r.residual).fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

fn within(reports: &[IdentityReport], tol: f64, budget_s: f64, start: Instant) -> Outcome {
    let w = worst(reports);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        passed: w < tol && secs < budget_s,
        detail: if budget_s.is_finite() {
            format!("{} checks, max residual {w:.2e} < {tol:.0e}, {secs:.2} s < {budget_s} s", reports.len())
        } else {
            format!("{} checks, max residual {w:.2e} < {tol:.0e}, {secs:.2} s", reports.len())
        },
    }
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let mut reports = Vec::new();
    for q in [0.3, 0.5] {
        let ctx = QContext::real(q)?.with_tolerance(1e-10)?;
        for a in 0..=6 {
            for b in 0..=6 {
                for cc in 0..=6 {
                    reports.push(brace_check(a, b, cc, &ctx)?);
                }
            }
        }
    }
    Ok(within(&reports, 1e-10, 10.0, start))
}

fn criterion_2() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(-0.3)?;
    let mut reports = Vec::new();
    for (x, y) in [(0.5, 0.6), (0.45, 0.7)] {
        for a in 0..=2 {
            for b in 0..=2 {
                for d in 0..=2 {
                    reports.push(star_triangle_fock(c(x, 0.0), c(y, 0.0), (a, b, d), SPIN_CAP, &ctx)?);
                }
            }
        }
    }
    Ok(within(&reports, 1e-7, 30.0, start))
}

fn criterion_3() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(0.4)?;
    let reports = vec![
        spectrum_check(32, Regularisation::I, &ctx)?,
        spectrum_check(32, Regularisation::II, &ctx)?,
        reg3_check(31, 32, &ctx)?,
    ];
    Ok(within(&reports, 1e-6, 5.0, start))
}

fn criterion_4() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(0.4)?;
    let p = FockRepParams::new(c(1.0, 0.0), c(1.1, 0.2), c(0.9, -0.1))?;
    let reports = vec![completeness_check(p, 14, 50, &ctx)?, antisymmetric_sum_check(14, 25, &ctx)?];
    Ok(within(&reports, 1e-8, f64::INFINITY, start))
}

/// Complex point with modulus in `[lo, hi]` and phase in `[-0.5, 0.5]`.
fn annulus(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> C {
    C::from_polar(rng.gen_range(lo..hi), rng.gen_range(-0.5..0.5))
}

fn criterion_5() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ctx = QContext::real(0.4)?;
    let mut reports = Vec::new();
    for _ in 0..3 {
        let (m, mp) = (rng.gen_range(0..5), rng.gen_range(0..5));
        reports.push(symmetry_check(annulus(&mut rng, 0.5, 1.5), m, mp, &ctx)?);
        let nome = ctx.with_q(annulus(&mut rng, 0.3, 0.5))?;
        reports.push(normalisation_check(6, &nome)?);
        let (x, y) = (annulus(&mut rng, 0.75, 0.95), annulus(&mut rng, 0.75, 0.95));
        reports.push(transitivity_check(x, y, m, mp, SPIN_CAP, &ctx)?);
        reports.push(product_check(annulus(&mut rng, 0.5, 1.5), m, mp, &ctx)?);
    }
    Ok(within(&reports, 1e-8, f64::INFINITY, start))
}

fn criterion_6() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(0.4)?;
    let gammas = [
        GammaContext::generic(C::from_polar(0.7, 0.4), 120, &ctx)?,
        GammaContext::generic(ctx.sqrt_q(), 120, &ctx)?,
        GammaContext::selected(0, 120, &ctx)?,
        GammaContext::selected(1, 120, &ctx)?,
    ];
    let mut reports = Vec::new();
    for gc in &gammas {
        reports.push(completeness_gamma_check(gc, c(1.1, 0.1), 12, &ctx)?);
        reports.push(veps_orthogonality_check(c(0.9, 0.0), c(0.8, 0.0), 0, 1, gc, &ctx)?);
        reports.push(veps_orthogonality_check(c(0.9, 0.0), c(0.8, 0.0), 2, 2, gc, &ctx)?);
        reports.push(projector_check(gc, 3, &ctx)?);
        reports.push(parity_vanishing_check(c(0.8, 0.0), 4, gc, &ctx)?);
    }
    for (a, b, cc) in [(0, 1, 1), (2, 1, 1), (3, 2, 2)] {
        reports.push(brace_gamma_check(a, b, cc, &gammas, &ctx)?);
    }
    Ok(within(&reports, 1e-8, f64::INFINITY, start))
}

fn criterion_7() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(0.4)?;
    let (x, y) = (c(0.7, 0.0), c(0.6, 0.0));
    let spins = [(0, 0, 0), (1, -1, 2), (2, 0, 1)];
    let mut reports = Vec::new();
    for two_nu in [0, 1] {
        let w = KMWeightSet::new(GammaContext::selected(two_nu, 40, &ctx)?);
        reports.push(star_triangle_km(&w, x, y, &spins, &ctx)?);
    }
    let generic = KMWeightSet::new(GammaContext::generic(C::from_polar(0.8, 0.3), 40, &ctx)?);
    let control = star_triangle_km(&generic, x, y, &spins, &ctx)?;
    let secs = start.elapsed().as_secs_f64();
    let w = worst(&reports);
    Ok(Outcome {
        passed: w < 1e-7 && control.residual > 1e-3 && control.verdict == Verdict::ExpectedFail && secs < 60.0,
        detail: format!(
            "selected max residual {w:.2e} < 1e-7, generic control {:.2e} > 1e-3 ({}), {secs:.2} s < 60 s",
            control.residual, control.verdict
        ),
    })
}

fn criterion_8() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(0.4)?;
    let mut functional = Vec::new();
    let mut central = Vec::new();
    for two_nu in [0, 1] {
        let w = KMWeightSet::new(GammaContext::selected(two_nu, 40, &ctx)?);
        for x in [0.6, 0.75] {
            functional.push(km_partition_check(&w, c(x, 0.0), &ctx)?);
        }
        central.push(central_spin_check(&w, &ctx)?);
    }
    let (wf, wc) = (worst(&functional), worst(&central));
    Ok(Outcome {
        passed: wf < 1e-9 && wc < 1e-10,
        detail: format!("functional max {wf:.2e} < 1e-9, central spin max {wc:.2e} < 1e-10, {:.2} s", start.elapsed().as_secs_f64()),
    })
}

fn criterion_9() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(0.4)?;
    let rep = FockRepParams::new(C::from_polar(0.9, 0.3), c(1.1, 0.0), c(1.0, 0.0))?;
    let (l, m) = (C::from_polar(1.3, 0.2), C::from_polar(0.7, -0.4));
    let reports = vec![
        rll_check(l, m, rep, 8, RllVariant::Plain, &ctx)?,
        rll_check(l, m, rep, 8, RllVariant::SigmaX, &ctx)?,
    ];
    Ok(within(&reports, 1e-12, f64::INFINITY, start))
}

fn criterion_10() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(0.4)?;
    let mut reports = Vec::new();
    for q in [c(0.4, 0.0), c(-0.3, 0.0), C::from_polar(0.5, 0.3)] {
        let qc = ctx.with_q(q)?;
        for kind in ThetaKind::ALL {
            reports.push(theta_check(kind, c(0.8, 0.5), &qc)?);
        }
    }
    reports.push(theta_constant_check(&ctx)?);
    reports.push(mf_check(&ctx)?);
    reports.push(gauss_check(c(0.2, 0.0), c(0.3, 0.0), &ctx)?);
    reports.push(gauss_double_sum_check(c(0.3, 0.0), c(0.2, 0.0), &ctx)?);
    reports.push(genfun_checks(c(0.3, 0.0), c(1.2, 0.0), c(0.8, 0.0), &ctx)?);
    for (m, mp) in [(0, 0), (1, 1), (0, 1), (2, 2), (3, 1)] {
        reports.push(orthogonality_b8_check(m, mp, &ctx)?);
    }
    for n in 0..6 {
        reports.push(poly_p_methods_check(n, c(1.3, 0.2), &ctx)?);
        reports.push(poly_p_difference_checks(n, c(1.3, 0.0), &ctx)?);
    }
    reports.push(chi_equation_checks(ChiParams::new(c(1.1, 0.0), c(0.3, 0.0), c(0.45, 0.0)), &ctx)?);
    reports.push(chi_equation_checks(ChiParams::new(c(0.0, 0.8), c(0.2, 0.0), c(0.5, 0.0)), &ctx)?);
    for m in 0..=6 {
        reports.push(chi_poly_check(m, c(1.3, 0.0), c(0.5, 0.0), &ctx)?);
    }
    let b = C::from_polar(1.0, PI / 5.0);
    for x in [0.0, 0.3, -0.7] {
        reports.push(jacobi_transform_check(x, b, &ctx)?);
    }
    Ok(within(&reports, 1e-9, f64::INFINITY, start))
}

fn criterion_11() -> Result<Outcome> {
    let start = Instant::now();
    let mc = ModularContext::new(PI / 5.0)?;
    let eta = mc.eta();
    let mut functional = Vec::new();
    for x in [c(-0.6, 0.0), c(-0.2, 0.1), c(0.2, 0.0), c(0.45, -0.1), c(0.9, 0.05)] {
        for dual in [false, true] {
            functional.push(faddeev_functional_check(x, dual, &mc)?);
        }
    }
    let mut reality = Vec::new();
    for (s, x) in [(0.3, 0.4), (-1.7, 0.9), (2.2, -1.3)] {
        reality.push(psi_reality_check(s, x, &mc)?);
    }
    let eigen = vec![psi_eigen_check(0.3, 0.4, &mc)?];
    let mut integral = Vec::new();
    for (mu, x, y) in [(c(0.0, 0.15) + eta / 3.0, 0.3, 0.5), (c(0.0, 0.2), 0.3, 0.5), (c(0.05, 0.3), 0.2, 0.7)] {
        integral.push(integral_consistency_check(mu, x, y, &mc)?);
    }
    let mut summation = Vec::new();
    for (mu, mup, x, z) in [
        (c(0.0, 0.2), c(0.0, 0.25), 0.3, 0.5),
        (c(0.05, 0.15), c(-0.02, 0.3), 0.2, 0.7),
        (c(0.0, 0.1), c(0.0, 0.35), 0.4, -0.1),
    ] {
        summation.push(summation_check_modular(mu, mup, x, z, &mc)?);
    }
    let secs = start.elapsed().as_secs_f64();
    let w = [worst(&functional), worst(&reality), worst(&eigen), worst(&integral), worst(&summation)];
    let ratio = &integral[0].params["alt_phase_ratio"];
    Ok(Outcome {
        passed: w[0] < 1e-9 && w[1] < 1e-8 && w[2] < 1e-7 && w[3] < 1e-4 && w[4] < 1e-4 && secs < 180.0,
        detail: format!(
            "functional {:.1e} < 1e-9, reality {:.1e} < 1e-8, eigen {:.1e} < 1e-7, integral {:.1e} < 1e-4, \
             summation {:.1e} < 1e-4, {secs:.2} s < 180 s; alternative phi0^2 ratio {ratio}",
            w[0], w[1], w[2], w[3], w[4]
        ),
    })
}

fn criterion_12() -> Result<Outcome> {
    let start = Instant::now();
    let ctx = QContext::real(0.35)?;
    let r = BoxRapidities::new(
        C::from_polar(0.7, 0.2),
        C::from_polar(1.3, -0.4),
        C::from_polar(0.9, 0.5),
        C::from_polar(0.6, 0.1),
    )?;
    let reports = vec![box_intertwining_check(r, 20, &ctx)?];
    Ok(within(&reports, 1e-5, 300.0, start))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 12] = [
        ("brace identities", criterion_1),
        ("Fock star-triangle", criterion_2),
        ("spectral experiment", criterion_3),
        ("completeness and antisymmetric sum", criterion_4),
        ("weight properties", criterion_5),
        ("V_gamma suite", criterion_6),
        ("KM star-triangle dichotomy", criterion_7),
        ("KM functional equations", criterion_8),
        ("RLL on truncated Fock space", criterion_9),
        ("q-series and polynomial identities", criterion_10),
        ("modular suite", criterion_11),
        ("box R-matrix intertwining", criterion_12),
    ];
    let mut stderr = std::io::stderr();
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = run().unwrap_or_else(|e| Outcome { passed: false, detail: format!("error: {e}") });
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        writeln!(stderr, "criterion {:>2} {verdict} {name}: {}", k + 1, outcome.detail).unwrap();
        if !outcome.passed {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
