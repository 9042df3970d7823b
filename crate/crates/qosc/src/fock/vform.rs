//! V-form overlaps `<lambda, a | mu, m>` between the occupation basis and
//! the eigenbasis of `H(mu)`.

use std::time::Instant;

use crate::context::{QContext, C, ONE, ZERO};
use crate::error::{QoscError, Result};
use crate::fock::weights::{measure, nf};
use crate::orthopoly::p_normalized_sequence;
use crate::params;
use crate::qseries::br;
use crate::report::{rel_residual_scaled, IdentityReport};

/// Parameters `omega`, `lambda`, `mu` of one Fock representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockRepParams {
    pub omega: C,
    pub lambda: C,
    pub mu: C,
}

impl FockRepParams {
    pub fn new(omega: C, lambda: C, mu: C) -> Result<Self> {
        if omega == ZERO || lambda == ZERO || mu == ZERO {
            return Err(QoscError::DomainError("omega, lambda and mu must be nonzero".into()));
        }
        Ok(Self { omega, lambda, mu })
    }

    /// `omega = lambda = mu = 1`.
    pub fn unit() -> Self {
        Self { omega: ONE, lambda: ONE, mu: ONE }
    }
}

/// `chi_{a,m}` for `a = 0..=a_max`: `q^{a^2/2} P_a(q^{m+1/2}) q^{m(m+1)/2} / sqrt((q^2;q^2)_a)`.
pub fn chi_column(m: i64, a_max: usize, ctx: &QContext) -> Vec<C> {
    p_normalized_sequence(ctx.half_pow(2 * m + 1), a_max, ctx.pow(m * (m + 1) / 2), ctx)
}

/// `chi_bar_{m,a} = (-1)^a q^a chi_{a,m}`.
pub fn chi_bar_row(m: i64, a_max: usize, ctx: &QContext) -> Vec<C> {
    let mut w = ONE;
    chi_column(m, a_max, ctx)
        .into_iter()
        .map(|c| {
            let t = w * c;
            w *= -ctx.q();
            t
        })
        .collect()
}

/// Overlap matrices on the window `a <= a_max`, `0 <= m <= m_max`.
#[derive(Debug, Clone)]
pub struct VFormMatrices {
    /// `chi[a][m]`.
    pub chi: Vec<Vec<C>>,
    /// `chi_bar[m][a]`.
    pub chi_bar: Vec<Vec<C>>,
    /// `<lambda, a | mu, m> = N_F^{-1} (mu/lambda)^a chi_{a,m}`, indexed `[a][m]`.
    pub ket: Vec<Vec<C>>,
    /// `<mu, m | lambda, a> = (mu/lambda)^{-a} chi_bar_{m,a}`, indexed `[m][a]`.
    pub bra: Vec<Vec<C>>,
    pub nf: C,
}

pub fn vform_matrices(p: FockRepParams, a_max: usize, m_max: usize, ctx: &QContext) -> Result<VFormMatrices> {
    if a_max == 0 || m_max == 0 {
        return Err(QoscError::DomainError("vform window needs a_max, m_max >= 1".into()));
    }
    let nf = nf(ctx)?;
    let columns: Vec<Vec<C>> = (0..=m_max as i64).map(|m| chi_column(m, a_max, ctx)).collect();
    let chi: Vec<Vec<C>> = (0..=a_max).map(|a| columns.iter().map(|col| col[a]).collect()).collect();
    let chi_bar: Vec<Vec<C>> = (0..=m_max as i64).map(|m| chi_bar_row(m, a_max, ctx)).collect();
    let r = p.mu / p.lambda;
    let ket = chi
        .iter()
        .enumerate()
        .map(|(a, row)| {
            let f = r.powi(a as i32) / nf;
            row.iter().map(|&c| c * f).collect()
        })
        .collect();
    let bra = chi_bar
        .iter()
        .map(|row| row.iter().enumerate().map(|(a, &c)| c * r.powi(-(a as i32))).collect())
        .collect();
    Ok(VFormMatrices { chi, chi_bar, ket, bra, nf })
}

/// Largest `m` used for the occupation-sum side of completeness.
const COMPLETENESS_M: usize = 6;

/// Both completeness sums: over spins, `ket S bra = delta`; over
/// occupations, `chi_bar chi = (-1)^m N_F delta / [q^{m+1/2}]`.
pub fn completeness_check(p: FockRepParams, a_max: usize, m_max: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let v = vform_matrices(p, a_max, m_max, ctx)?;
    let s: Vec<C> = (0..=m_max as i64).map(|m| measure(m, ctx)).collect();
    let mut worst = 0.0f64;
    for a in 0..=a_max {
        for b in 0..=a_max {
            let (mut sum, mut abs) = (ZERO, 0.0);
            for m in 0..=m_max {
                let t = v.ket[a][m] * s[m] * v.bra[m][b];
                sum += t;
                abs += t.norm();
            }
            let target = if a == b { ONE } else { ZERO };
            worst = worst.max(rel_residual_scaled(sum, target, abs));
        }
    }
    let cap = 600;
    let m_top = COMPLETENESS_M.min(m_max) as i64;
    let cols: Vec<Vec<C>> = (0..=m_top).map(|m| chi_column(m, cap, ctx)).collect();
    let rows: Vec<Vec<C>> = (0..=m_top).map(|m| chi_bar_row(m, cap, ctx)).collect();
    for m in 0..=m_top as usize {
        for mp in 0..=m_top as usize {
            let sum = ctx.sum_capped(cap, |a| Ok(rows[m][a] * cols[mp][a]))?;
            let target = if m == mp { v.nf / s[m] } else { ZERO };
            worst = worst.max(rel_residual_scaled(sum.value, target, sum.abs_sum));
        }
    }
    Ok(IdentityReport::check(
        "fock.completeness.4_15_4_16",
        params![("q", ctx.q()), ("a_max", a_max), ("m_max", m_max), ("mu/lambda", p.mu / p.lambda)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// `sum_{m=-M}^{M-1} chi_{a,m} [q^{m+1/2}] chi_bar_{m,b} = 0`, with the
/// negative-spin columns evaluated directly rather than by reflection.
pub fn antisymmetric_sum_check(a_max: usize, m_half: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let ms: Vec<i64> = (-(m_half as i64)..m_half as i64).collect();
    let cols: Vec<Vec<C>> = ms.iter().map(|&m| chi_column(m, a_max, ctx)).collect();
    let rows: Vec<Vec<C>> = ms.iter().map(|&m| chi_bar_row(m, a_max, ctx)).collect();
    let brs: Vec<C> = ms.iter().map(|&m| br(ctx.half_pow(2 * m + 1))).collect();
    let mut worst = 0.0f64;
    for a in 0..=a_max {
        for b in 0..=a_max {
            let (mut sum, mut abs) = (ZERO, 0.0);
            for k in 0..ms.len() {
                let t = cols[k][a] * brs[k] * rows[k][b];
                sum += t;
                abs += t.norm();
            }
            worst = worst.max(sum.norm() / abs.max(1e-300));
        }
    }
    Ok(IdentityReport::check(
        "fock.antisymmetric_sum.4_17",
        params![("q", ctx.q()), ("a_max", a_max), ("M", m_half)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_row() {
        let ctx = QContext::real(0.4).unwrap();
        let v = vform_matrices(FockRepParams::unit(), 3, 5, &ctx).unwrap();
        for m in 0..=5 {
            assert!((v.ket[0][m] * v.nf - ctx.pow((m * (m + 1) / 2) as i64)).norm() < 1e-15);
        }
    }

    #[test]
    fn completeness_small_window() {
        let ctx = QContext::real(0.4).unwrap();
        let p = FockRepParams::new(ONE, C::new(1.1, 0.2), C::new(0.9, -0.1)).unwrap();
        let r = completeness_check(p, 8, 30, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = antisymmetric_sum_check(6, 20, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
    }
}
