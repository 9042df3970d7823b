//! The polynomials `P_n(xi)` and their q-hypergeometric extension `chi(u, z)`.

use std::time::Instant;

use crate::context::{pow_int, QContext, C, ONE, ZERO};
use crate::error::{QoscError, Result};
use crate::params;
use crate::qseries::{qpoch_finite, qpoch_inf, qpoch_inf_multi};
use crate::report::{rel_residual, rel_residual_scaled, IdentityReport};

/// Largest `|xi - 1/xi|` treated as degenerate in difference quotients.
pub const DEGENERATE_XI: f64 = 1e-6;
const OVERFLOW_LN: f64 = 690.0;

/// How to evaluate `P_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolyEvalMethod {
    /// Closed sum over q-binomials; the cross-check oracle.
    ExplicitSum,
    /// Three-term recursion in `n`; the default.
    ForwardRecursion,
    /// Recursion through the shifted arguments `q xi` and `xi / q`.
    QShiftRecursion,
}

impl PolyEvalMethod {
    pub const ALL: [PolyEvalMethod; 3] =
        [PolyEvalMethod::ExplicitSum, PolyEvalMethod::ForwardRecursion, PolyEvalMethod::QShiftRecursion];
}

fn check_xi(xi: C) -> Result<()> {
    if xi == ZERO {
        Err(QoscError::DomainError("P_n(0) is undefined".into()))
    } else {
        Ok(())
    }
}

fn check_finite(z: C, what: &str) -> Result<C> {
    if z.re.is_finite() && z.im.is_finite() && z.norm() < 1e300 {
        Ok(z)
    } else {
        Err(QoscError::OverflowGuard(format!("{what} left the double range; reduce n")))
    }
}

/// `P_n(xi)` by the selected method.
pub fn poly_p(n: usize, xi: C, method: PolyEvalMethod, ctx: &QContext) -> Result<C> {
    check_xi(xi)?;
    match method {
        PolyEvalMethod::ExplicitSum => explicit_sum(n, xi, ctx),
        PolyEvalMethod::ForwardRecursion => forward(n, xi, ctx),
        PolyEvalMethod::QShiftRecursion => qshift(n, xi, ctx),
    }
}

fn explicit_sum(n: usize, xi: C, ctx: &QContext) -> Result<C> {
    let worst = 2.0 * (n * n) as f64 / 4.0 * -ctx.q().norm().ln();
    if n > 30 && worst > OVERFLOW_LN {
        return Err(QoscError::OverflowGuard(format!("q^(-2k(n-k)) exceeds 1e300 at n = {n}")));
    }
    let q2 = ctx.q2();
    // q-binomial row built incrementally: [n, k+1] = [n, k] (1 - q^{2(n-k)}) / (1 - q^{2(k+1)})
    let mut binom = ONE;
    let mut total = ZERO;
    for k in 0..=n {
        let e = 2 * (k * (n - k)) as i64;
        total += pow_int(xi, 2 * k as i64 - n as i64) * ctx.pow(-e) * binom;
        if k < n {
            binom *= (ONE - pow_int(q2, (n - k) as i64)) / (ONE - pow_int(q2, (k + 1) as i64));
        }
    }
    check_finite(total, "explicit sum")
}

fn forward(n: usize, xi: C, ctx: &QContext) -> Result<C> {
    let h = xi + xi.inv();
    let (mut prev, mut cur) = (ZERO, ONE);
    for k in 0..n {
        let next = h * cur - (ONE - ctx.pow(-2 * k as i64)) * prev;
        prev = cur;
        cur = next;
    }
    check_finite(cur, "forward recursion")
}

fn qshift(n: usize, xi: C, ctx: &QContext) -> Result<C> {
    // level[k][j + (n - k)] = P_k(q^j xi) for |j| <= n - k
    let q = ctx.q();
    let mut level: Vec<C> = vec![ONE; 2 * n + 1];
    for k in 0..n {
        let width = n - k;
        let mut next = Vec::with_capacity(2 * width - 1);
        for j in -(width as i64 - 1)..=(width as i64 - 1) {
            let x = xi * pow_int(q, j);
            let d = x - x.inv();
            if d.norm() < DEGENERATE_XI {
                return Err(QoscError::DegenerateArgument(format!("xi q^{j} is within {DEGENERATE_XI:e} of +-1")));
            }
            let up = level[(j + 1 + width as i64) as usize];
            let down = level[(j - 1 + width as i64) as usize];
            next.push(ctx.pow(-(k as i64)) * (x * x * up - (x * x).inv() * down) / d);
        }
        level = next;
    }
    check_finite(level[0], "q-shift recursion")
}

/// `sqrt((q^2; q^2)_n)` as a product of principal roots of `1 - q^{2k}`.
pub fn sqrt_q2_poch(n: usize, ctx: &QContext) -> C {
    (1..=n as i64).map(|k| (ONE - ctx.pow(2 * k)).sqrt()).product()
}

/// `scale * q^{n^2/2} P_n(xi)` for `n = 0..=n_max`, by the stable scaled
/// recursion `Q_{n+1} = q^{n+1/2} h Q_n + (1 - q^{2n}) Q_{n-1}`.
pub fn p_scaled_sequence(xi: C, n_max: usize, scale: C, ctx: &QContext) -> Vec<C> {
    let h = xi + xi.inv();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(scale);
    let mut prev = ZERO;
    for n in 0..n_max {
        let cur = out[n];
        let next = ctx.half_pow(2 * n as i64 + 1) * h * cur + (ONE - ctx.pow(2 * n as i64)) * prev;
        prev = cur;
        out.push(next);
    }
    out
}

/// `scale * q^{n^2/2} P_n(xi) / sqrt((q^2;q^2)_n)` for `n = 0..=n_max`.
pub fn p_normalized_sequence(xi: C, n_max: usize, scale: C, ctx: &QContext) -> Vec<C> {
    let h = xi + xi.inv();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(scale);
    let mut prev = ZERO;
    for n in 0..n_max {
        let cur = out[n];
        let a = ctx.half_pow(2 * n as i64 + 1) * h * cur + (ONE - ctx.pow(2 * n as i64)).sqrt() * prev;
        prev = cur;
        out.push(a / (ONE - ctx.pow(2 * n as i64 + 2)).sqrt());
    }
    out
}

/// Pairwise agreement of the three evaluation methods.
pub fn poly_p_methods_check(n: usize, xi: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let v: Vec<C> = PolyEvalMethod::ALL.iter().map(|&m| poly_p(n, xi, m, ctx)).collect::<Result<_>>()?;
    let residual = rel_residual(v[0], v[1]).max(rel_residual(v[0], v[2])).max(rel_residual(v[1], v[2]));
    Ok(IdentityReport::check(
        "orthopoly.methods.B_1_B_2_B_3",
        params![("q", ctx.q()), ("n", n), ("xi", xi)],
        residual,
        ctx.tol(),
    )
    .timed(start))
}

/// Homogeneous difference equation and backward recursion at `(n, xi)`.
pub fn poly_p_difference_checks(n: usize, xi: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    check_xi(xi)?;
    let d = xi - xi.inv();
    if d.norm() < DEGENERATE_XI {
        return Err(QoscError::DegenerateArgument(format!("xi = {xi} makes xi - 1/xi vanish")));
    }
    let q = ctx.q();
    let m = PolyEvalMethod::ExplicitSum;
    let p = poly_p(n, xi, m, ctx)?;
    let up = poly_p(n, q * xi, m, ctx)?;
    let down = poly_p(n, xi / q, m, ctx)?;
    let qn = ctx.pow(-(n as i64));
    let b4_rhs = qn * (xi * up - xi.inv() * down) / d;
    let b4_scale = (qn.norm() * ((xi * up).norm() + (down / xi).norm()) / d.norm()).max(p.norm());
    let b4 = rel_residual_scaled(p, b4_rhs, b4_scale);
    let b5 = if n == 0 {
        (qn * (up - down) / d).norm() / b4_scale.max(1e-300)
    } else {
        let lhs = (ONE - ctx.pow(-2 * n as i64)) * poly_p(n - 1, xi, m, ctx)?;
        let rhs = qn * (up - down) / d;
        rel_residual_scaled(lhs, rhs, qn.norm() * (up.norm() + down.norm()) / d.norm())
    };
    Ok(IdentityReport::check(
        "orthopoly.difference.B_4_B_5",
        params![("q", q), ("n", n), ("xi", xi)],
        b4.max(b5),
        ctx.tol(),
    )
    .timed(start))
}

fn sum_with_sequence<F>(seqs: &[Vec<C>], ctx: &QContext, mut term: F) -> Result<C>
where
    F: FnMut(usize, &[C]) -> C,
{
    let mut vals = vec![ZERO; seqs.len()];
    let limit = seqs[0].len();
    let mut out = None;
    let s = ctx.sum_series(|n| {
        if n >= limit {
            out = Some(QoscError::TruncationExhausted(limit));
            return ZERO;
        }
        for (v, s) in vals.iter_mut().zip(seqs) {
            *v = s[n];
        }
        term(n, &vals)
    })?;
    match out {
        Some(e) => Err(e),
        None => Ok(s.value),
    }
}

const GENFUN_TERMS: usize = 600;

/// Both generating functions at one point. `(B.6)` is checked at `xi = u`.
pub fn genfun_checks(z: C, u: C, v: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let q = ctx.q();
    let q2 = ctx.q2();
    let radius6 = q.norm().sqrt();
    let radius7 = q.norm();
    if z.norm() >= 0.9 * radius7.min(radius6) {
        return Err(QoscError::DomainError(format!(
            "|z| = {} outside 0.9 x convergence radius {}",
            z.norm(),
            radius7
        )));
    }
    check_xi(u)?;
    check_xi(v)?;
    let pu = p_scaled_sequence(u, GENFUN_TERMS, ONE, ctx);
    let pv = p_scaled_sequence(v, GENFUN_TERMS, ONE, ctx);
    // (q;q)_n and (q^2;q^2)_n tables
    let mut qq = vec![ONE];
    let mut qq2 = vec![ONE];
    for n in 1..=GENFUN_TERMS as i64 {
        qq.push(qq[n as usize - 1] * (ONE - ctx.pow(n)));
        qq2.push(qq2[n as usize - 1] * (ONE - ctx.pow(2 * n)));
    }
    let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let b6 = sum_with_sequence(std::slice::from_ref(&pu), ctx, |n, p| {
        sign(n) * ctx.half_pow(-(n as i64)) * pow_int(z, n as i64) / qq[n] * p[0]
    })?;
    let b6_rhs = qpoch_inf_multi(&[z * u, z / u], q, ctx)? / qpoch_inf(z * z / q, q2, ctx)?;
    let b7 = sum_with_sequence(&[pu, pv], ctx, |n, p| {
        sign(n) * ctx.pow(-(n as i64)) * pow_int(z, n as i64) / qq2[n] * p[0] * p[1]
    })?;
    let b7_rhs = qpoch_inf_multi(&[z * u * v, z / (u * v), z * u / v, z * v / u], q2, ctx)?
        / qpoch_inf(z * z / q2, q2, ctx)?;
    Ok(IdentityReport::check(
        "orthopoly.genfun.B_6_B_7",
        params![("q", q), ("z", z), ("u", u), ("v", v)],
        rel_residual(b6, b6_rhs).max(rel_residual(b7, b7_rhs)),
        ctx.tol(),
    )
    .timed(start))
}

/// The orthogonality sum over `n` at `xi = q^{m+1/2}`, `q^{m'+1/2}`.
pub fn orthogonality_b8_check(m: usize, mp: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let xi = ctx.half_pow(2 * m as i64 + 1);
    let xj = ctx.half_pow(2 * mp as i64 + 1);
    let n_max = GENFUN_TERMS;
    let a = p_normalized_sequence(xi, n_max, ONE, ctx);
    let b = p_normalized_sequence(xj, n_max, ONE, ctx);
    let mut scale = 0.0f64;
    let lhs = sum_with_sequence(&[a, b], ctx, |n, p| {
        let t = ctx.pow(n as i64) * p[0] * p[1] * if n % 2 == 0 { 1.0 } else { -1.0 };
        scale += t.norm();
        t
    })?;
    let theta4 = crate::qseries::theta_product(crate::qseries::ThetaKind::BigTheta4, ONE, ctx)?;
    let rhs = if m == mp {
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        theta4 * sign * ctx.pow(-((m * m) as i64)) / (ONE - ctx.pow(2 * m as i64 + 1))
    } else {
        ZERO
    };
    Ok(IdentityReport::check(
        "orthopoly.normalisation.B_8",
        params![("q", ctx.q()), ("m", m), ("m'", mp)],
        rel_residual_scaled(lhs, rhs, scale),
        ctx.tol(),
    )
    .timed(start))
}

/// Arguments of `chi(u, z; nome)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiParams {
    pub u: C,
    pub z: C,
    pub nome: C,
}

impl ChiParams {
    pub fn new(u: C, z: C, nome: C) -> Self {
        Self { u, z, nome }
    }

    fn with_u(self, u: C) -> Self {
        Self { u, ..self }
    }

    fn with_z(self, z: C) -> Self {
        Self { z, ..self }
    }
}

/// `chi` as `mantissa * e^{ln_scale}`, so arguments with huge `|z|` stay
/// representable. `abs_mantissa` is the term-moduli sum on the same scale.
#[derive(Debug, Clone, Copy)]
pub struct ScaledValue {
    pub mantissa: C,
    pub abs_mantissa: f64,
    pub ln_scale: f64,
}

impl ScaledValue {
    pub fn value(&self) -> C {
        self.mantissa * self.ln_scale.exp()
    }
}

/// Series for `chi` summed in log form with the tail rule.
pub fn chi_scaled(p: ChiParams, ctx: &QContext) -> Result<ScaledValue> {
    let nome = p.nome;
    if !(nome.norm() < 1.0) {
        return Err(QoscError::DomainError(format!("chi needs |nome| < 1, got {}", nome.norm())));
    }
    let n2 = nome * nome;
    let u2 = p.u * p.u;
    let cut = ctx.tail_cut().ln();
    let mut lt = ZERO; // log of the current term
    let mut scale = 0.0f64;
    let mut acc = ZERO;
    let mut abs_acc = 0.0f64;
    let mut run = 0;
    let mut n2k = ONE; // nome^{2n}
    for _ in 0..ctx.max_terms() {
        if lt.re > scale {
            let f = (scale - lt.re).exp();
            acc *= f;
            abs_acc *= f;
            scale = lt.re;
        }
        let t = (lt - scale).exp();
        acc += t;
        abs_acc += t.norm();
        if lt.re < scale + cut {
            run += 1;
            if run >= crate::context::TAIL_RUN {
                return Ok(ScaledValue { mantissa: acc, abs_mantissa: abs_acc, ln_scale: scale });
            }
        } else {
            run = 0;
        }
        let next_n2k = n2k * n2;
        let ratio = -next_n2k * (ONE - p.z * n2k) / (ONE - next_n2k) * u2;
        if ratio == ZERO {
            return Ok(ScaledValue { mantissa: acc, abs_mantissa: abs_acc, ln_scale: scale });
        }
        lt += ratio.ln();
        n2k = next_n2k;
    }
    Err(QoscError::TruncationExhausted(ctx.max_terms()))
}

/// `chi(u, z; nome) = sum (-1)^n nome^{n(n+1)} (z; nome^2)_n / (nome^2; nome^2)_n u^{2n}`.
pub fn chi(p: ChiParams, ctx: &QContext) -> Result<C> {
    Ok(chi_scaled(p, ctx)?.value())
}

/// Difference equations, both shifted-z relations, the z-recursion and the
/// Wronskian at one point. The residual is the largest of the five.
pub fn chi_equation_checks(p: ChiParams, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let (u, z, nq) = (p.u, p.z, p.nome);
    if u == ZERO {
        return Err(QoscError::DomainError("chi equations need u != 0".into()));
    }
    let n2 = nq * nq;
    let f = |pp: ChiParams| chi(pp, ctx);
    let c_u = f(p)?;
    let c_down = f(p.with_u(u / nq))?;
    let c_up = f(p.with_u(nq * u))?;
    let c_zup = f(p.with_z(n2 * z))?;
    let c_zdown = f(p.with_z(z / n2))?;
    let u2 = u * u;
    let mut worst = 0.0f64;
    let mut push = |lhs: C, rhs: C, scale: f64| worst = worst.max(rel_residual_scaled(lhs, rhs, scale));
    // (C.3)
    let a = (ONE - u2) * c_u;
    let b = z * u2 * c_up;
    push(c_down, a + b, a.norm() + b.norm());
    // (C.4), both lines
    let b = z * c_up;
    push((ONE - z) * (ONE - u2) * c_zup, c_down - b, c_down.norm() + b.norm());
    let b = z * u2 * u2 * c_up;
    push((ONE - u2) * c_zdown, c_down - b, c_down.norm() + b.norm());
    // (C.5)
    let a = c_zdown / u;
    let b = u * (ONE - z) * c_zup;
    push(a + b, (u + u.inv()) * c_u, a.norm() + b.norm());
    // (C.6)
    let excluded = [ONE, -ONE, nq, -nq, nq.inv(), -nq.inv()];
    if excluded.iter().all(|&e| (u - e).norm() > 1e-12) {
        let c_inv = f(p.with_u(u.inv()))?;
        let c_qinv = f(p.with_u(nq / u))?;
        let a = c_down * c_inv;
        let b = z * c_u * c_qinv;
        let rhs = qpoch_inf_multi(&[u2, n2 / u2, z], n2, ctx)?;
        push(a - b, rhs, a.norm() + b.norm());
    }
    Ok(IdentityReport::check(
        "orthopoly.chi_equations.C_3_C_6",
        params![("u", u), ("z", z), ("nome", nq)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// `chi(u, nome^{-2m}) = u^m P_m(u)` where `P_m` uses the same nome.
pub fn chi_poly_check(m: usize, u: C, nome: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let pc = ctx.with_q(nome)?;
    let lhs = chi(ChiParams::new(u, pow_int(nome, -2 * m as i64), nome), ctx)?;
    let rhs = pow_int(u, m as i64) * poly_p(m, u, PolyEvalMethod::ForwardRecursion, &pc)?;
    Ok(IdentityReport::check(
        "orthopoly.chi_poly.C_2",
        params![("m", m), ("u", u), ("nome", nome)],
        rel_residual(lhs, rhs),
        ctx.tol(),
    )
    .timed(start))
}

/// `chi(nome^{-m}, z) / chi(nome^{m}, z) = z^m`.
pub fn wronskian_ratio_check(m: usize, z: C, nome: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let hi = chi(ChiParams::new(pow_int(nome, -(m as i64)), z, nome), ctx)?;
    let lo = chi(ChiParams::new(pow_int(nome, m as i64), z, nome), ctx)?;
    Ok(IdentityReport::check(
        "orthopoly.wronskian_ratio.6_15",
        params![("m", m), ("z", z), ("nome", nome)],
        rel_residual(hi / lo, pow_int(z, m as i64)),
        ctx.tol(),
    )
    .timed(start))
}

/// `(q^2; q^2)_n` with the context nome; shared by several modules.
pub fn q2_poch(n: usize, ctx: &QContext) -> C {
    qpoch_finite(ctx.q2(), ctx.q2(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::I;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn low_order_values() {
        let ctx = QContext::real(0.4).unwrap();
        let xi = c(1.3, 0.2);
        for m in PolyEvalMethod::ALL {
            assert_eq!(poly_p(0, xi, m, &ctx).unwrap(), ONE);
            let p1 = poly_p(1, xi, m, &ctx).unwrap();
            assert!((p1 - (xi + xi.inv())).norm() < 1e-13);
            let p2 = poly_p(2, xi, m, &ctx).unwrap();
            let expect = xi * xi + (xi * xi).inv() + 1.0 + 1.0 / 0.16;
            assert!((p2 - expect).norm() < 1e-12, "{m:?}: {p2} vs {expect}");
        }
        assert!(poly_p(3, ZERO, PolyEvalMethod::ForwardRecursion, &ctx).is_err());
    }

    #[test]
    fn parity_and_inversion() {
        let ctx = QContext::real(0.4).unwrap();
        let xi = c(0.8, 0.5);
        for n in 0..8 {
            let p = poly_p(n, xi, PolyEvalMethod::ForwardRecursion, &ctx).unwrap();
            let pm = poly_p(n, -xi, PolyEvalMethod::ForwardRecursion, &ctx).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(rel_residual(pm, p * sign) < 1e-12);
            let pi = poly_p(n, xi.inv(), PolyEvalMethod::ExplicitSum, &ctx).unwrap();
            assert!(rel_residual(p, pi) < 1e-12);
        }
    }

    #[test]
    fn scaled_sequences_match_direct() {
        let ctx = QContext::real(0.35).unwrap();
        let xi = c(0.9, -0.3);
        let s = p_scaled_sequence(xi, 10, ONE, &ctx);
        let r = p_normalized_sequence(xi, 10, ONE, &ctx);
        for n in 0..=10 {
            let p = poly_p(n, xi, PolyEvalMethod::ExplicitSum, &ctx).unwrap();
            let scaled = ctx.half_pow((n * n) as i64) * p;
            assert!(rel_residual(s[n], scaled) < 1e-11);
            assert!(rel_residual(r[n], scaled / sqrt_q2_poch(n, &ctx)) < 1e-11);
        }
    }

    #[test]
    fn difference_equations() {
        let ctx = QContext::real(0.4).unwrap();
        assert!(poly_p_difference_checks(3, c(1.3, 0.0), &ctx).unwrap().passed());
        let zero = poly_p_difference_checks(0, c(1.7, 0.1), &ctx).unwrap();
        assert!(zero.residual < 1e-14);
        let ctx = QContext::real(0.35).unwrap();
        assert!(poly_p_difference_checks(5, c(0.7, 0.2), &ctx).unwrap().passed());
        assert!(matches!(
            poly_p_difference_checks(2, ONE, &ctx),
            Err(QoscError::DegenerateArgument(_))
        ));
    }

    #[test]
    fn generating_functions() {
        let ctx = QContext::real(0.4).unwrap();
        let r = genfun_checks(c(0.3, 0.0), c(1.2, 0.0), c(0.8, 0.0), &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = genfun_checks(ZERO, c(1.2, 0.0), c(0.8, 0.0), &ctx).unwrap();
        assert!(r.residual < 1e-15);
        assert!(genfun_checks(c(0.5, 0.0), ONE, ONE, &ctx).is_err());
        for (m, mp) in [(0, 0), (1, 1), (0, 1), (2, 2), (3, 1)] {
            let r = orthogonality_b8_check(m, mp, &ctx).unwrap();
            assert!(r.passed(), "B8 {m} {mp}: {}", r.residual);
        }
    }

    #[test]
    fn chi_basics() {
        let ctx = QContext::real(0.4).unwrap();
        let nome = c(0.4, 0.0);
        let u = c(1.1, 0.3);
        assert!((chi(ChiParams::new(u, ONE, nome), &ctx).unwrap() - ONE).norm() < 1e-15);
        let v = chi(ChiParams::new(u, nome.powi(-2), nome), &ctx).unwrap();
        assert!(rel_residual(v, u * (u + u.inv())) < 1e-12);
        let r = wronskian_ratio_check(2, c(0.3, 0.0), c(0.5, 0.0), &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        for m in 0..=10 {
            assert!(chi_poly_check(m, c(1.3, 0.0), c(0.5, 0.0), &ctx).unwrap().passed());
        }
    }

    #[test]
    fn chi_equations() {
        let ctx = QContext::real(0.4).unwrap();
        let r = chi_equation_checks(ChiParams::new(c(1.1, 0.0), c(0.3, 0.0), c(0.45, 0.0)), &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = chi_equation_checks(ChiParams::new(I * 0.8, c(0.2, 0.0), c(0.5, 0.0)), &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = chi_equation_checks(ChiParams::new(c(1.3, 0.4), ONE, c(0.5, 0.0)), &ctx).unwrap();
        assert!(r.residual < 1e-14);
    }
}
