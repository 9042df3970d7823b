//! Strongly coupled modular regime: Faddeev's dilogarithm, the wavefunction
//! `Psi(sigma, x)`, the hyperbolic weight `V_mu(x, y)` and its quadrature checks.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use crate::context::{QContext, C, I, ONE, ZERO};
use crate::error::{QoscError, Result};
use crate::orthopoly::{chi_scaled, ChiParams, ScaledValue};
use crate::params;
use crate::qseries::{qpoch_inf_log, theta_product, ThetaKind};
use crate::report::{rel_residual, rel_residual_scaled, IdentityReport};

pub const DEFAULT_TOL_QUAD: f64 = 1e-4;
pub const FUNCTIONAL_TOL: f64 = 1e-9;
pub const REALITY_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-7;
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Bound on the second difference across a zero of `H(u)`, relative to `|Psi|`.
pub const CANCELLATION_TOL: f64 = 1e-4;
/// Successive distances in the `mu' -> i0` probe must shrink at least this fast.
pub const DELTA_LIMIT_RATIO: f64 = 0.75;

const POLE_GAP: f64 = 1e-12;
/// Evaluation points this close to a removable zero are bridged linearly.
const NEAR_ZERO: f64 = 1e-4;
const BRIDGE: f64 = 1e-3;
const MAX_DOUBLINGS: u32 = 2;
/// Node spacing of the `y` quadrature in the summation formula.
const SUMMATION_STEP: f64 = 2.5e-3;

/// Modular parameter `b = e^{i theta}` with derived nomes and the quadrature policy.
#[derive(Debug, Clone)]
pub struct ModularContext {
    theta: f64,
    b: C,
    q: C,
    qbar: C,
    eta: C,
    quad_halfwidth: f64,
    quad_points: usize,
    tol_quad: f64,
    series: QContext,
    series_bar: QContext,
}

impl ModularContext {
    /// Requires `theta` in `(0, pi/2)`, where both nomes contract.
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < PI / 2.0) {
            return Err(QoscError::InvalidContext(format!("theta = {theta} lies outside (0, pi/2)")));
        }
        let b = C::from_polar(1.0, theta);
        let q = (I * PI * b * b).exp();
        let qbar = (-I * PI / (b * b)).exp();
        let eta = I * (b + b.inv()) / 2.0;
        if eta.re.abs() > 1e-14 {
            return Err(QoscError::InvalidContext(format!("eta = {eta} is not imaginary")));
        }
        Ok(Self {
            theta,
            b,
            q,
            qbar,
            eta,
            quad_halfwidth: 10.0,
            quad_points: 400,
            tol_quad: DEFAULT_TOL_QUAD,
            series: QContext::new(q)?,
            series_bar: QContext::new(qbar)?,
        })
    }

    /// Starting window `[-halfwidth, halfwidth]` with `points` midpoint nodes.
    pub fn with_quadrature(mut self, halfwidth: f64, points: usize, tol_quad: f64) -> Result<Self> {
        if !(halfwidth > 0.0) || points == 0 || !(tol_quad > 0.0 && tol_quad < 1.0) {
            return Err(QoscError::InvalidContext("quadrature needs L > 0, points > 0, 0 < tol < 1".into()));
        }
        self.quad_halfwidth = halfwidth;
        self.quad_points = points;
        self.tol_quad = tol_quad;
        Ok(self)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn b(&self) -> C {
        self.b
    }

    pub fn q(&self) -> C {
        self.q
    }

    pub fn qbar(&self) -> C {
        self.qbar
    }

    pub fn eta(&self) -> C {
        self.eta
    }

    pub fn quad_halfwidth(&self) -> f64 {
        self.quad_halfwidth
    }

    pub fn quad_points(&self) -> usize {
        self.quad_points
    }

    pub fn tol_quad(&self) -> f64 {
        self.tol_quad
    }

    /// `b` or its partner `1/b`.
    fn partner(&self, dual: bool) -> C {
        if dual {
            self.b.inv()
        } else {
            self.b
        }
    }
}

/// A point `(sigma, x)`; the exponentials of both variables are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicPoint {
    pub sigma: C,
    pub x: C,
}

impl HyperbolicPoint {
    pub fn new(sigma: C, x: C) -> Self {
        Self { sigma, x }
    }

    pub fn u(&self, mc: &ModularContext) -> C {
        (PI * mc.b * self.x).exp()
    }

    pub fn u_bar(&self, mc: &ModularContext) -> C {
        (PI * self.x / mc.b).exp()
    }

    pub fn k(&self, mc: &ModularContext) -> C {
        -(I * PI * mc.b * mc.b / 2.0 + PI * mc.b * self.sigma).exp()
    }

    pub fn k_bar(&self, mc: &ModularContext) -> C {
        -(-I * PI / (2.0 * mc.b * mc.b) + PI * self.sigma / mc.b).exp()
    }

    /// `z = q / k^2 = e^{-2 pi b sigma}`.
    pub fn z(&self, mc: &ModularContext) -> C {
        (-2.0 * PI * mc.b * self.sigma).exp()
    }

    pub fn z_bar(&self, mc: &ModularContext) -> C {
        (-2.0 * PI * self.sigma / mc.b).exp()
    }
}

/// `ln phi(x)` from the double product; the branch is irrelevant once exponentiated.
pub fn faddeev_phi_ln(x: C, mc: &ModularContext) -> Result<C> {
    let b = mc.b;
    let den = (2.0 * PI * (x - mc.eta) / b).exp();
    let qb2 = mc.qbar * mc.qbar;
    let mut t = den;
    for k in 0..mc.series_bar.max_terms() {
        if (ONE - t).norm() < POLE_GAP {
            let base = x - mc.eta - I * (k as f64) / b;
            let j = (base / (I * b)).re.round();
            let pole = mc.eta + I * (k as f64) / b + I * j * b;
            return Err(QoscError::PoleHit(format!("phi({x}) sits on the pole at {pole}")));
        }
        if t.norm() < mc.series_bar.tail_cut() {
            break;
        }
        t *= qb2;
    }
    let num = qpoch_inf_log((2.0 * PI * (x + mc.eta) * b).exp(), mc.q * mc.q, &mc.series)?;
    let den = qpoch_inf_log(den, qb2, &mc.series_bar)?;
    if num.zeros > 0 {
        return Err(QoscError::DomainError(format!("phi({x}) vanishes")));
    }
    Ok(num.ln - den.ln)
}

/// Faddeev's dilogarithm `phi(x)`.
pub fn faddeev_phi(x: C, mc: &ModularContext) -> Result<C> {
    Ok(faddeev_phi_ln(x, mc)?.exp())
}

/// `phi(x - i b^{±1}/2) / phi(x + i b^{±1}/2) = 1 + e^{2 pi x b^{±1}}`.
pub fn faddeev_functional_check(x: C, dual: bool, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let c = mc.partner(dual);
    let lhs = (faddeev_phi_ln(x - I * c / 2.0, mc)? - faddeev_phi_ln(x + I * c / 2.0, mc)?).exp();
    let rhs = ONE + (2.0 * PI * x * c).exp();
    let partner = if dual { "1/b" } else { "b" };
    let params = params![("theta", mc.theta), ("x", x), ("partner", partner)];
    Ok(IdentityReport::check("modular.functional.6_17", params, rel_residual(lhs, rhs), FUNCTIONAL_TOL)
        .timed(start))
}

/// Samples `phi(x) phi(-x)` at shrinking `x` and extrapolates to `x = 0`.
#[derive(Debug, Clone)]
pub struct PhiInversionProbe {
    pub samples: Vec<(f64, C)>,
    pub extrapolated: C,
    pub phi0_squared: C,
}

/// Informational only; nothing is asserted.
pub fn phi_inversion_probe(mc: &ModularContext) -> Result<PhiInversionProbe> {
    let samples = [0.1, 0.05, 0.025]
        .iter()
        .map(|&x| {
            let x = C::new(x, 0.0);
            Ok((x.re, (faddeev_phi_ln(x, mc)? + faddeev_phi_ln(-x, mc)?).exp()))
        })
        .collect::<Result<Vec<_>>>()?;
    let extrapolated = (4.0 * samples[2].1 - samples[1].1) / 3.0;
    let phi0_squared = (2.0 * faddeev_phi_ln(ZERO, mc)?).exp();
    Ok(PhiInversionProbe { samples, extrapolated, phi0_squared })
}

/// Mantissa times `e^{ln}` folded back into a scaled value.
fn scaled(mantissa: C, ln: C) -> (C, f64) {
    (mantissa * C::from_polar(1.0, ln.im), ln.re)
}

/// `a - b` for scaled pairs, on the larger of the two scales.
fn scaled_sub(a: (C, f64), b: (C, f64)) -> (C, f64) {
    let s = a.1.max(b.1);
    (a.0 * (a.1 - s).exp() - b.0 * (b.1 - s).exp(), s)
}

/// Nearest point of `{ i n b + i j / b }`, the zero set of `H(u)` in the `x` plane.
fn nearest_h_zero(x: C, mc: &ModularContext) -> C {
    let v1 = I * mc.b;
    let v2 = I / mc.b;
    let det = v1.re * v2.im - v1.im * v2.re;
    let n = ((x.re * v2.im - x.im * v2.re) / det).round();
    let j = ((v1.re * x.im - v1.im * x.re) / det).round();
    n * v1 + j * v2
}

fn psi_unbridged(sigma: C, x: C, mc: &ModularContext) -> Result<ScaledValue> {
    let p = HyperbolicPoint::new(sigma, x);
    let (u, ub, z, zb) = (p.u(mc), p.u_bar(mc), p.z(mc), p.z_bar(mc));
    let chi = |u: C, z: C, nome: C, ctx: &QContext| chi_scaled(ChiParams::new(u, z, nome), ctx);
    let c_u = chi(u, z, mc.q, &mc.series)?;
    let c_inv = chi(u.inv(), z, mc.q, &mc.series)?;
    let cb_u = chi(ub, zb, mc.qbar, &mc.series_bar)?;
    let cb_inv = chi(ub.inv(), zb, mc.qbar, &mc.series_bar)?;
    let phase = I * PI * sigma * x;
    let a = scaled(cb_inv.mantissa * c_u.mantissa, phase + cb_inv.ln_scale + c_u.ln_scale);
    let b = scaled(cb_u.mantissa * c_inv.mantissa, -phase + cb_u.ln_scale + c_inv.ln_scale);
    let abs = a.0.norm() * (a.1 - a.1.max(b.1)).exp() + b.0.norm() * (b.1 - a.1.max(b.1)).exp();
    let (m, s) = scaled_sub(a, b);
    let h = theta_product(ThetaKind::H, u, &mc.series)?;
    let g = (-I * PI / 8.0 + I * PI * x * x / 2.0 - I * mc.theta / 2.0 - I * PI * mc.b * mc.b / 4.0).exp() / h;
    Ok(ScaledValue { mantissa: m * g, abs_mantissa: abs * g.norm(), ln_scale: s })
}

/// Linear bridge through `x0 ± BRIDGE` along the real direction.
fn bridge<F: Fn(C) -> Result<(C, f64)>>(x: C, x0: C, f: F) -> Result<(C, f64)> {
    let lo = f(x0 - BRIDGE)?;
    let hi = f(x0 + BRIDGE)?;
    let s = lo.1.max(hi.1);
    let (lo, hi) = (lo.0 * (lo.1 - s).exp(), hi.0 * (hi.1 - s).exp());
    Ok((lo + (x - x0 + BRIDGE) / (2.0 * BRIDGE) * (hi - lo), s))
}

/// `Psi(sigma, x)` as a scaled value. Points within `1e-4` of a zero of `H(u)`
/// are bridged from `1e-3` on either side, where the pole cancellation is benign.
pub fn psi_scaled(sigma: C, x: C, mc: &ModularContext) -> Result<ScaledValue> {
    let x0 = nearest_h_zero(x, mc);
    if (x - x0).norm() >= NEAR_ZERO {
        return psi_unbridged(sigma, x, mc);
    }
    let (m, s) = bridge(x, x0, |t| {
        let v = psi_unbridged(sigma, t, mc)?;
        Ok((v.mantissa, v.ln_scale))
    })?;
    Ok(ScaledValue { mantissa: m, abs_mantissa: m.norm(), ln_scale: s })
}

/// `Psi(sigma, x) = G(x) (e^{i pi sigma x} chibar(1/u) chi(u) - e^{-i pi sigma x} chibar(u) chi(1/u))`.
pub fn psi(sigma: C, x: C, mc: &ModularContext) -> Result<C> {
    Ok(psi_scaled(sigma, x, mc)?.value())
}

/// `|Im Psi| / |Psi|` at real `(sigma, x)`.
pub fn psi_reality_check(sigma: f64, x: f64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let v = psi_scaled(C::new(sigma, 0.0), C::new(x, 0.0), mc)?.mantissa;
    let params = params![("theta", mc.theta), ("sigma", sigma), ("x", x)];
    Ok(IdentityReport::check("modular.psi_reality.6_11", params, v.im.abs() / v.norm(), REALITY_TOL).timed(start))
}

/// `Psi(sigma, -x) = Psi(sigma, x)`: `1/H(u)` flips sign together with the bracket.
pub fn psi_parity_check(sigma: f64, x: f64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let s = C::new(sigma, 0.0);
    let a = psi(s, C::new(x, 0.0), mc)?;
    let b = psi(s, C::new(-x, 0.0), mc)?;
    let params = params![("theta", mc.theta), ("sigma", sigma), ("x", x)];
    Ok(IdentityReport::check("modular.psi_parity.6_11", params, rel_residual(a, b), REALITY_TOL).timed(start))
}

/// Both `K_0` and `Kbar_0` difference equations in `x`.
pub fn psi_eigen_check(sigma: f64, x: f64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let s = C::new(sigma, 0.0);
    let xc = C::new(x, 0.0);
    let center = psi(s, xc, mc)?;
    let mut residual = 0.0f64;
    for dual in [false, true] {
        let c = mc.partner(dual);
        let shift = I * c;
        let (plus, minus) = (psi(s, xc + shift, mc)?, psi(s, xc - shift, mc)?);
        let denom = 2.0 * (PI * c * xc).sinh();
        let lhs = if dual { (minus - plus) / denom } else { (plus - minus) / denom };
        let nome = if dual { mc.qbar } else { mc.q };
        let rhs = -nome.sqrt() * (PI * c * s).exp() * center;
        let scale = (plus.norm() + minus.norm()) / denom.norm();
        residual = residual.max(rel_residual_scaled(lhs, rhs, scale.max(rhs.norm())));
    }
    let params = params![("theta", mc.theta), ("sigma", sigma), ("x", x)];
    Ok(IdentityReport::check("modular.eigen.6_14", params, residual, EIGEN_TOL).timed(start))
}

/// Smoothness of `Psi` across the real zero `x0 = -2 k sin(theta)` of `H(u)`:
/// the symmetric averages at distance `h` and `2h` differ only at `O(h^2)`.
pub fn pole_cancellation_check(sigma: f64, k: i64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let s = C::new(sigma, 0.0);
    let x0 = (-2 * k) as f64 * mc.theta.sin();
    let h = BRIDGE;
    let at = |d: f64| psi(s, C::new(x0 + d, 0.0), mc);
    let near = (at(h)? + at(-h)?) / 2.0;
    let far = (at(2.0 * h)? + at(-2.0 * h)?) / 2.0;
    let centre = at(0.0)?;
    let scale = near.norm().max(far.norm()).max(centre.norm());
    let residual = ((near - far).norm().max((centre - near).norm()) / scale).max(if centre.is_finite() {
        0.0
    } else {
        f64::INFINITY
    });
    let params = params![("theta", mc.theta), ("sigma", sigma), ("x0", x0)];
    Ok(IdentityReport::check("modular.pole_cancellation.6_15", params, residual, CANCELLATION_TOL).timed(start))
}

/// `ln phi_0^2 = i pi (b^2 + b^{-2}) / 12`, the value `(q / qbar)^{1/12}`.
fn ln_phi0_squared(mc: &ModularContext) -> C {
    I * PI * (mc.b * mc.b + (mc.b * mc.b).inv()) / 12.0
}

/// The competing exponential `e^{-i pi eta^2/6 - i pi/12}` for `phi_0^2`, kept for diagnostics.
fn ln_phi0_squared_alternative(mc: &ModularContext) -> C {
    -I * PI * mc.eta * mc.eta / 6.0 - I * PI / 12.0
}

fn ln_phi_mu_with(mu: C, ln_phi0: C, mc: &ModularContext) -> Result<C> {
    let gamma = I * PI / 4.0;
    Ok(C::new(2f64.ln(), 0.0) + gamma + ln_phi0 - 2.0 * I * PI * mu * mu - 2.0 * PI * mc.b * mu
        + faddeev_phi_ln(mc.eta - 2.0 * mu, mc)?)
}

/// `Phi(mu) = 2 gamma phi_0^2 e^{-2 i pi mu^2 - 2 pi b mu} phi(eta - 2 mu)`, `gamma = e^{i pi / 4}`.
pub fn phi_mu(mu: C, mc: &ModularContext) -> Result<C> {
    Ok(ln_phi_mu_with(mu, ln_phi0_squared(mc), mc)?.exp())
}

fn ln_weight_unnormalized(mu: C, x: C, y: C, mc: &ModularContext) -> Result<C> {
    let d = mu - mc.eta;
    let f = |t: C| faddeev_phi_ln(t, mc);
    let minus = (x - y) / 2.0;
    let plus = (x + y) / 2.0;
    Ok(2.0 * PI * I * d * x + f(minus - d)? - f(minus + d)? + f(plus - d)? - f(plus + d)?)
}

/// Closed-form hyperbolic weight `V_mu(x, y)`.
pub fn weight_v_modular(mu: C, x: C, y: C, mc: &ModularContext) -> Result<C> {
    Ok((ln_weight_unnormalized(mu, x, y, mc)? - ln_phi_mu_with(mu, ln_phi0_squared(mc), mc)?).exp())
}

/// `Vbar_mu = V_{eta - mu}`.
pub fn weight_v_bar_modular(mu: C, x: C, y: C, mc: &ModularContext) -> Result<C> {
    weight_v_modular(mc.eta - mu, x, y, mc)
}

/// `V_mu(x, y)` against `V_mu(-x, y)`, `V_mu(y, x)`, `V_mu(x, -y)` and `V_mu(-y, -x)`.
pub fn weight_symmetry_check(mu: C, x: f64, y: f64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let v = |a: f64, b: f64| weight_v_modular(mu, C::new(a, 0.0), C::new(b, 0.0), mc);
    let base = v(x, y)?;
    let residual = [v(-x, y)?, v(y, x)?, v(x, -y)?, v(-y, -x)?]
        .iter()
        .map(|&w| rel_residual(w, base))
        .fold(0.0, f64::max);
    let params = params![("theta", mc.theta), ("mu", mu), ("x", x), ("y", y)];
    Ok(IdentityReport::check("modular.symmetry.6_26", params, residual, SYMMETRY_TOL).timed(start))
}

/// Result of a doubling midpoint quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: C,
    /// Estimate on the previous, half-width window.
    pub previous: C,
    pub halfwidth: f64,
    pub points: usize,
    pub converged: bool,
}

impl Quadrature {
    /// Change between the last two windows relative to the final value.
    pub fn increment(&self) -> f64 {
        (self.value - self.previous).norm() / self.value.norm()
    }
}

fn midpoint<F>(a: f64, b: f64, n: usize, f: &F) -> Result<C>
where
    F: Fn(f64) -> Result<C> + Sync,
{
    let h = (b - a) / n as f64;
    let sum = (0..n).into_par_iter().map(|k| f(a + (k as f64 + 0.5) * h)).try_reduce(|| ZERO, |s, t| Ok(s + t))?;
    Ok(sum * h)
}

/// Midpoint rule on `[-L, L]`; `L` and the node count double together (the
/// spacing stays fixed, so old nodes are reused) until the added tails
/// contribute less than `tol / 10` of the total.
fn doubling_quadrature<F>(halfwidth: f64, points: usize, tol: f64, f: F) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<C> + Sync,
{
    let mut l = halfwidth;
    let mut n = points;
    let mut value = midpoint(-l, l, n, &f)?;
    let mut previous = value;
    let mut converged = false;
    for _ in 0..MAX_DOUBLINGS {
        let tails = midpoint(-2.0 * l, -l, n / 2, &f)? + midpoint(l, 2.0 * l, n / 2, &f)?;
        previous = value;
        value += tails;
        l *= 2.0;
        n *= 2;
        if tails.norm() <= tol / 10.0 * value.norm() {
            converged = true;
            break;
        }
    }
    Ok(Quadrature { value, previous, halfwidth: l, points: n, converged })
}

/// Second-order zeros of the `sigma` measure sit at `sigma = -2 n sin(theta)`, `n >= 0`.
fn nearest_measure_zero(sigma: f64, mc: &ModularContext) -> Option<f64> {
    let step = 2.0 * mc.theta.sin();
    let n = (-sigma / step).round().max(0.0);
    let s0 = -n * step;
    ((sigma - s0).abs() < NEAR_ZERO).then_some(s0)
}

fn ln_norm_n(mc: &ModularContext) -> Result<C> {
    let q2 = mc.q * mc.q;
    let qb2 = mc.qbar * mc.qbar;
    let p = qpoch_inf_log(q2, q2, &mc.series)?.ln + qpoch_inf_log(qb2, qb2, &mc.series_bar)?.ln;
    Ok(C::new(2f64.ln(), 0.0) - (mc.q * mc.qbar).ln() / 4.0 - p)
}

fn spectral_integrand_raw(mu: C, sigma: f64, x: C, y: C, ln_n: C, mc: &ModularContext) -> Result<(C, f64)> {
    let s = C::new(sigma, 0.0);
    let p = HyperbolicPoint::new(s, x);
    let (z, zb) = (p.z(mc), p.z_bar(mc));
    let den = qpoch_inf_log(z, mc.q * mc.q, &mc.series)? * qpoch_inf_log(zb, mc.qbar * mc.qbar, &mc.series_bar)?;
    if den.zeros != 0 {
        return Err(QoscError::PoleHit(format!("measure zero at sigma = {sigma}")));
    }
    let px = psi_scaled(s, x, mc)?;
    let py = psi_scaled(s, y, mc)?;
    let ln = 2.0 * PI * I * mu * s + px.ln_scale + py.ln_scale - den.ln - ln_n;
    Ok(scaled(px.mantissa * py.mantissa, ln))
}

/// Integrand of the `sigma` representation of `V_mu(x, y)`, finite across the measure zeros.
fn spectral_integrand(mu: C, sigma: f64, x: C, y: C, ln_n: C, mc: &ModularContext) -> Result<C> {
    let (m, s) = match nearest_measure_zero(sigma, mc) {
        None => spectral_integrand_raw(mu, sigma, x, y, ln_n, mc)?,
        Some(s0) => bridge(C::new(sigma, 0.0), C::new(s0, 0.0), |t| spectral_integrand_raw(mu, t.re, x, y, ln_n, mc))?,
    };
    Ok(m * s.exp())
}

/// `V_mu(x, y) = N^{-1} int d sigma e^{2 pi i mu sigma} Psi(sigma, x) Psi(sigma, y) / ((z; q^2)(zbar; qbar^2))`.
pub fn weight_v_modular_integral(mu: C, x: f64, y: f64, mc: &ModularContext) -> Result<Quadrature> {
    let ln_n = ln_norm_n(mc)?;
    let (x, y) = (C::new(x, 0.0), C::new(y, 0.0));
    doubling_quadrature(mc.quad_halfwidth, mc.quad_points, mc.tol_quad, |s| spectral_integrand(mu, s, x, y, ln_n, mc))
}

/// The quadrature against the closed form. `alt_phase_ratio` is the measured
/// ratio integral / closed form when the competing `phi_0^2` is used.
pub fn integral_consistency_check(mu: C, x: f64, y: f64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let quad = weight_v_modular_integral(mu, x, y, mc)?;
    let (xc, yc) = (C::new(x, 0.0), C::new(y, 0.0));
    let closed = weight_v_modular(mu, xc, yc, mc)?;
    let unnorm = ln_weight_unnormalized(mu, xc, yc, mc)?;
    let alternative = (unnorm - ln_phi_mu_with(mu, ln_phi0_squared_alternative(mc), mc)?).exp();
    let mut residual = rel_residual(quad.value, closed);
    if !quad.converged {
        residual = residual.max(quad.increment());
    }
    let params = params![
        ("theta", mc.theta),
        ("mu", mu),
        ("x", x),
        ("y", y),
        ("alt_phase_ratio", quad.value / alternative)
    ];
    Ok(IdentityReport::check("modular.integral.6_22", params, residual, mc.tol_quad).timed(start))
}

/// `S(y) = 2 sinh(pi b y) sinh(pi y / b)`.
pub fn measure_s(y: f64, mc: &ModularContext) -> C {
    let y = C::new(y, 0.0);
    2.0 * (PI * mc.b * y).sinh() * (PI * y / mc.b).sinh()
}

fn summation_integrand(mu: C, mu_p: C, x: C, z: C, y: f64, mc: &ModularContext) -> Result<C> {
    let yc = C::new(y, 0.0);
    let ln = ln_weight_unnormalized(mu, x, yc, mc)? + ln_weight_unnormalized(mu_p, yc, z, mc)?;
    Ok(ln.exp() * measure_s(y, mc))
}

/// Evaluated convolution `int dy V_mu(x, y) S(y) V_mu'(y, z)` with its target.
#[derive(Debug, Clone, Copy)]
pub struct Summation {
    pub quadrature: Quadrature,
    pub target: C,
    /// `2 int_0^L`, the same integral over the half line.
    pub half_line: C,
}

/// Runs the `y` quadrature. The window doubles until the integrand at `±L`
/// falls below `tol_quad / 100` of the target, else `WindowTooSmall`.
pub fn summation_modular(mu: C, mu_p: C, x: f64, z: f64, mc: &ModularContext) -> Result<Summation> {
    let (xc, zc) = (C::new(x, 0.0), C::new(z, 0.0));
    // Phi factors are pulled out of the integral to keep the integrand O(1).
    let ln_phi = ln_phi_mu_with(mu, ln_phi0_squared(mc), mc)? + ln_phi_mu_with(mu_p, ln_phi0_squared(mc), mc)?;
    let target = weight_v_modular(mu + mu_p, xc, zc, mc)?;
    let target_unnorm = target * ln_phi.exp();
    let f = |y: f64| summation_integrand(mu, mu_p, xc, zc, y, mc);
    let mut l = mc.quad_halfwidth;
    let mut endpoint = f64::INFINITY;
    for _ in 0..=MAX_DOUBLINGS {
        endpoint = f(l)?.norm().max(f(-l)?.norm()) / target_unnorm.norm();
        if endpoint < mc.tol_quad * 1e-2 {
            break;
        }
        l *= 2.0;
    }
    if !(endpoint < mc.tol_quad * 1e-2) {
        return Err(QoscError::WindowTooSmall(endpoint));
    }
    let points = (2.0 * l / SUMMATION_STEP).round() as usize;
    let quad = doubling_quadrature(l, points, mc.tol_quad, f)?;
    let half = 2.0 * midpoint(0.0, l, points / 2, &f)?;
    let unscale = (-ln_phi).exp();
    Ok(Summation {
        quadrature: Quadrature { value: quad.value * unscale, previous: quad.previous * unscale, ..quad },
        target,
        half_line: half * unscale,
    })
}

/// `int dy V_mu(x, y) S(y) V_mu'(y, z) = V_{mu + mu'}(x, z)`.
pub fn summation_check_modular(mu: C, mu_p: C, x: f64, z: f64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let s = summation_modular(mu, mu_p, x, z, mc)?;
    let mut residual = rel_residual_scaled(s.quadrature.value, s.target, s.target.norm());
    if !s.quadrature.converged {
        residual = residual.max(s.quadrature.increment());
    }
    let params = params![("theta", mc.theta), ("mu", mu), ("mu_p", mu_p), ("x", x), ("z", z)];
    Ok(IdentityReport::check("modular.summation.6_27", params, residual, mc.tol_quad).timed(start))
}

/// The integrand is even in `y`, so twice the half line reproduces the full line.
pub fn summation_half_line_check(mu: C, mu_p: C, x: f64, z: f64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let s = summation_modular(mu, mu_p, x, z, mc)?;
    let residual = rel_residual(s.half_line, s.quadrature.value);
    let params = params![("theta", mc.theta), ("mu", mu), ("mu_p", mu_p), ("x", x), ("z", z)];
    Ok(IdentityReport::check("modular.summation_half_line.6_27", params, residual, mc.tol_quad).timed(start))
}

/// Shrinks `mu'` along `{0.2, 0.1, 0.05} i` and measures the distance of the
/// convolution from `V_mu(x, z)`. Residual: the largest ratio of successive distances.
pub fn delta_limit_check(mu: C, x: f64, z: f64, mc: &ModularContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let limit = weight_v_modular(mu, C::new(x, 0.0), C::new(z, 0.0), mc)?;
    let distances = [0.2, 0.1, 0.05]
        .iter()
        .map(|&t| Ok((summation_modular(mu, C::new(0.0, t), x, z, mc)?.quadrature.value - limit).norm()))
        .collect::<Result<Vec<f64>>>()?;
    let residual = distances.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let params = params![("theta", mc.theta), ("mu", mu), ("x", x), ("z", z)];
    Ok(IdentityReport::check("modular.delta_limit.6_25", params, residual, DELTA_LIMIT_RATIO).timed(start))
}
