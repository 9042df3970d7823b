//! Pochhammer symbols, brackets, theta functions and the classical identities
//! built on them.

use std::f64::consts::PI;
use std::time::Instant;

use crate::context::{pow_int, LogVal, QContext, C, I, ONE, ZERO};
use crate::error::{QoscError, Result};
use crate::params;
use crate::report::{rel_residual, rel_residual_scaled, IdentityReport};

/// `prod_{k=0}^{n-1} (1 - x q^k)`; the nome is taken literally.
pub fn qpoch_finite(x: C, q: C, n: usize) -> C {
    let mut out = ONE;
    let mut t = x;
    for _ in 0..n {
        out *= ONE - t;
        t *= q;
    }
    out
}

/// Finite Pochhammer for any integer index, `(x; q)_{-n} = 1 / (x q^{-n}; q)_n`.
pub fn qpoch(x: C, q: C, n: i64) -> C {
    if n >= 0 {
        qpoch_finite(x, q, n as usize)
    } else {
        qpoch_finite(x * pow_int(q, n), q, (-n) as usize).inv()
    }
}

fn check_nome(q: C) -> Result<()> {
    if q.norm() < 1.0 {
        Ok(())
    } else {
        Err(QoscError::DomainError(format!("nome modulus {} is not below 1", q.norm())))
    }
}

/// `(x; q)_inf`, truncated once `|x q^k|` stays below the tail cut.
pub fn qpoch_inf(x: C, q: C, ctx: &QContext) -> Result<C> {
    check_nome(q)?;
    let mut out = ONE;
    let mut t = x;
    let mut run = 0;
    for _ in 0..ctx.max_terms() {
        out *= ONE - t;
        if t.norm() < ctx.tail_cut() {
            run += 1;
            if run >= crate::context::TAIL_RUN {
                return Ok(out);
            }
        } else {
            run = 0;
        }
        t *= q;
    }
    Err(QoscError::TruncationExhausted(ctx.max_terms()))
}

/// `(x, y, ...; q)_inf` as the product of single symbols.
pub fn qpoch_inf_multi(xs: &[C], q: C, ctx: &QContext) -> Result<C> {
    xs.iter().try_fold(ONE, |acc, &x| Ok(acc * qpoch_inf(x, q, ctx)?))
}

/// `(x; q)_inf` in log form, for arguments where the product overflows.
pub fn qpoch_inf_log(x: C, q: C, ctx: &QContext) -> Result<LogVal> {
    check_nome(q)?;
    let mut out = LogVal::one();
    let mut t = x;
    let mut run = 0;
    for _ in 0..ctx.max_terms() {
        out = out * LogVal::from_c(ONE - t);
        if t.norm() < ctx.tail_cut() {
            run += 1;
            if run >= crate::context::TAIL_RUN {
                return Ok(out);
            }
        } else {
            run = 0;
        }
        t *= q;
    }
    Err(QoscError::TruncationExhausted(ctx.max_terms()))
}

/// `[z] = z - 1/z`.
pub fn bracket(z: C) -> Result<C> {
    if z == ZERO {
        return Err(QoscError::DomainError("bracket of zero".into()));
    }
    Ok(br(z))
}

pub(crate) fn br(z: C) -> C {
    z - z.inv()
}

/// Selects one of the five theta functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThetaKind {
    /// `theta_4(u) = sum q^{n^2/2} (-u)^n`.
    Theta4,
    /// `theta_3(u) = theta_4(-u)`.
    Theta3,
    /// `Theta_4(u) = sum q^{n^2} (-u)^n`.
    BigTheta4,
    /// `Theta_3(u) = Theta_4(-u)`.
    BigTheta3,
    /// `H(u) = sum q^{n(n-1)} (-1)^n u^{2n-1}`, odd in `u`.
    H,
}

impl ThetaKind {
    pub const ALL: [ThetaKind; 5] =
        [ThetaKind::Theta4, ThetaKind::Theta3, ThetaKind::BigTheta4, ThetaKind::BigTheta3, ThetaKind::H];
}

/// Bilateral series form; returns the sum and the sum of term moduli.
pub fn theta_sum(kind: ThetaKind, u: C, ctx: &QContext) -> Result<(C, f64)> {
    let s = match kind {
        ThetaKind::Theta4 => ctx.sum_bilateral(2, |n| ctx.half_pow(n * n) * pow_int(-u, n))?,
        ThetaKind::Theta3 => ctx.sum_bilateral(2, |n| ctx.half_pow(n * n) * pow_int(u, n))?,
        ThetaKind::BigTheta4 => ctx.sum_bilateral(2, |n| ctx.pow(n * n) * pow_int(-u, n))?,
        ThetaKind::BigTheta3 => ctx.sum_bilateral(2, |n| ctx.pow(n * n) * pow_int(u, n))?,
        ThetaKind::H => {
            if u == ZERO {
                return Err(QoscError::DomainError("H(0) is undefined".into()));
            }
            ctx.sum_bilateral(2, |n| {
                let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                ctx.pow(n * (n - 1)) * pow_int(u, 2 * n - 1) * sign
            })?
        }
    };
    Ok((s.value, s.abs_sum))
}

/// Infinite-product form.
pub fn theta_product(kind: ThetaKind, u: C, ctx: &QContext) -> Result<C> {
    let q = ctx.q();
    let q2 = ctx.q2();
    let r = ctx.sqrt_q();
    match kind {
        ThetaKind::Theta4 => qpoch_inf_multi(&[r * u, r / u, q], q, ctx),
        ThetaKind::Theta3 => qpoch_inf_multi(&[-r * u, -r / u, q], q, ctx),
        ThetaKind::BigTheta4 => qpoch_inf_multi(&[q * u, q / u, q2], q2, ctx),
        ThetaKind::BigTheta3 => qpoch_inf_multi(&[-q * u, -q / u, q2], q2, ctx),
        ThetaKind::H => {
            if u == ZERO {
                return Err(QoscError::DomainError("H(0) is undefined".into()));
            }
            Ok(qpoch_inf_multi(&[u * u, q2 / (u * u), q2], q2, ctx)? / u)
        }
    }
}

/// Evaluates both forms, insists they agree, and returns the sum.
pub fn theta(kind: ThetaKind, u: C, ctx: &QContext) -> Result<C> {
    let (s, scale) = theta_sum(kind, u, ctx)?;
    let p = theta_product(kind, u, ctx)?;
    let residual = rel_residual_scaled(s, p, scale * 1e-3);
    if residual > ctx.tol() {
        return Err(QoscError::RepresentationMismatch { what: format!("{kind:?}({u})"), residual });
    }
    Ok(s)
}

/// Sum/product residual of one theta function at one point.
pub fn theta_check(kind: ThetaKind, u: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let (s, scale) = theta_sum(kind, u, ctx)?;
    let p = theta_product(kind, u, ctx)?;
    let residual = rel_residual_scaled(s, p, scale * 1e-3);
    Ok(IdentityReport::check(
        "qseries.theta.A_4",
        params![("kind", format!("{kind:?}")), ("q", ctx.q()), ("u", u)],
        residual,
        ctx.tol(),
    )
    .timed(start))
}

/// `Theta_4(1)` three ways: series, product, `(q;q)_inf / (-q;q)_inf`.
pub fn theta_constant_check(ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let (s, _) = theta_sum(ThetaKind::BigTheta4, ONE, ctx)?;
    let p = theta_product(ThetaKind::BigTheta4, ONE, ctx)?;
    let q = ctx.q();
    let r = qpoch_inf(q, q, ctx)? / qpoch_inf(-q, q, ctx)?;
    let residual = rel_residual(s, p).max(rel_residual(s, r)).max(rel_residual(p, r));
    Ok(IdentityReport::check("qseries.theta_constant.A_6", params![("q", q)], residual, ctx.tol()).timed(start))
}

/// `M_F = -q^{-1/2} (q; q)_inf`, the series form against the product.
pub fn mf(ctx: &QContext) -> Result<C> {
    Ok(-qpoch_inf(ctx.q(), ctx.q(), ctx)? / ctx.sqrt_q())
}

pub fn mf_check(ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let series = ctx.sum_bilateral(2, |m| {
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        ctx.pow(m * (3 * m + 1) / 2) * sign
    })?;
    let lhs = -series.value / ctx.sqrt_q();
    let rhs = mf(ctx)?;
    Ok(IdentityReport::check("qseries.mf.A_7", params![("q", ctx.q())], rel_residual(lhs, rhs), ctx.tol())
        .timed(start))
}

/// Both sides of the Jacobi transform of `H`, with an optional extra phase
/// on the right side (used by the negative control).
fn jacobi_sides(x: f64, b: C, extra_phase: f64, ctx: &QContext) -> Result<(C, C)> {
    let q = (I * PI * b * b).exp();
    let qb = (-I * PI / (b * b)).exp();
    let qc = ctx.with_q(q)?;
    let qbc = ctx.with_q(qb)?;
    let u = (PI * b * x).exp();
    let ub = (PI * x / b).exp();
    let q2 = q * q;
    let qb2 = qb * qb;
    let lhs = (I * PI * b * b / 4.0).exp() * qpoch_inf_multi(&[u * u, q2 / (u * u), q2], q2, &qc)? / u;
    let phase = I * (3.0 * PI / 4.0 + PI * x * x + extra_phase);
    let rhs = phase.exp() / b * (-I * PI / (4.0 * b * b)).exp()
        * qpoch_inf_multi(&[ub * ub, qb2 / (ub * ub), qb2], qb2, &qbc)?
        / ub;
    Ok((lhs, rhs))
}

/// Jacobi transform of `H(u)` between the nomes `q = e^{i pi b^2}` and
/// `qbar = e^{-i pi / b^2}`, with `u = e^{pi b x}`, `ubar = e^{pi x / b}`.
pub fn jacobi_transform_check(x: f64, b: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let (lhs, rhs) = jacobi_sides(x, b, 0.0, ctx)?;
    Ok(IdentityReport::check("qseries.jacobi.A_5", params![("x", x), ("b", b)], rel_residual(lhs, rhs), ctx.tol())
        .timed(start))
}

/// Negative control: the right side rotated by `e^{0.01 i}` must not match.
pub fn jacobi_transform_perturbed(x: f64, b: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let (lhs, rhs) = jacobi_sides(x, b, 0.01, ctx)?;
    Ok(IdentityReport::negative_control(
        "qseries.jacobi_perturbed.A_5",
        params![("x", x), ("b", b), ("phase", 0.01)],
        rel_residual(lhs, rhs),
        ctx.tol(),
    )
    .timed(start))
}

/// Gauss identity `sum x^n (z;q)_n/(q;q)_n = (xz;q)_inf/(x;q)_inf` with the
/// context nome.
pub fn gauss_check(x: C, z: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let q = ctx.q();
    let mut t = ONE;
    let lhs = ctx.sum_series(|n| {
        let out = t;
        let qn = ctx.pow(n as i64);
        t *= x * (ONE - z * qn) / (ONE - qn * q);
        out
    })?;
    let rhs = qpoch_inf(x * z, q, ctx)? / qpoch_inf(x, q, ctx)?;
    Ok(IdentityReport::check(
        "qseries.gauss.A_9",
        params![("q", q), ("x", x), ("z", z)],
        rel_residual(lhs.value, rhs),
        ctx.tol(),
    )
    .timed(start))
}

/// Double sum against the product ratio, and the diagonal sum against
/// `1/(q^2;q^2)_inf`. The residual is the larger of the two.
pub fn gauss_double_sum_check(z1: C, z2: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    if z1.norm() >= 1.0 || z2.norm() >= 1.0 {
        return Err(QoscError::DomainError("double Gauss sum needs |z1|, |z2| < 1".into()));
    }
    let q2 = ctx.q2();
    let poch2: Vec<C> = {
        let mut v = vec![ONE];
        for n in 1..=ctx.max_terms().min(4000) {
            let prev = v[n - 1];
            v.push(prev * (ONE - pow_int(q2, n as i64)));
        }
        v
    };
    let mut inner_err = None;
    let lhs = ctx.sum_series(|n1| {
        if n1 >= poch2.len() {
            inner_err = Some(QoscError::TruncationExhausted(poch2.len()));
            return ZERO;
        }
        let head = pow_int(z1, n1 as i64) / poch2[n1];
        match ctx.sum_series(|n2| {
            if n2 >= poch2.len() {
                return ZERO;
            }
            ctx.pow(2 * (n1 * n2) as i64) * pow_int(z2, n2 as i64) / poch2[n2]
        }) {
            Ok(s) => head * s.value,
            Err(e) => {
                inner_err = Some(e);
                ZERO
            }
        }
    })?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    let rhs = qpoch_inf(z1 * z2, q2, ctx)? / (qpoch_inf(z1, q2, ctx)? * qpoch_inf(z2, q2, ctx)?);
    let diag = ctx.sum_series(|n| {
        let p = poch2.get(n).copied().unwrap_or(ONE);
        ctx.pow(2 * (n * n) as i64) / (p * p)
    })?;
    let diag_rhs = qpoch_inf(q2, q2, ctx)?.inv();
    let residual = rel_residual(lhs.value, rhs).max(rel_residual(diag.value, diag_rhs));
    Ok(IdentityReport::check(
        "qseries.gauss_double.A_8",
        params![("q", ctx.q()), ("z1", z1), ("z2", z2)],
        residual,
        ctx.tol(),
    )
    .timed(start))
}
