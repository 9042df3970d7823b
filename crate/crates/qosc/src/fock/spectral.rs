//! Truncations of the unbounded three-term operator on the Fock space and
//! the limits of their spectra.

use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::context::{QContext, C, I, ONE, ZERO};
use crate::error::{QoscError, Result};
use crate::params;
use crate::report::IdentityReport;

/// Number of low-lying eigenvalues tracked.
pub const BRANCHES: usize = 4;
/// Absolute accuracy demanded of the converged branches.
pub const SPECTRAL_TOL: f64 = 1e-6;

/// Boundary completion of the last row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regularisation {
    /// `psi_{N+1} = (mu/lambda) psi_N`.
    I,
    /// `psi_{N+1} = -(mu/lambda) psi_N`.
    II,
    /// `psi_{N+1} = 0`.
    III,
}

impl Regularisation {
    fn feedback(self) -> f64 {
        match self {
            Regularisation::I => 1.0,
            Regularisation::II => -1.0,
            Regularisation::III => 0.0,
        }
    }
}

impl fmt::Display for Regularisation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularisation::I => "I",
            Regularisation::II => "II",
            Regularisation::III => "III",
        })
    }
}

impl std::str::FromStr for Regularisation {
    type Err = QoscError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(Regularisation::I),
            "II" | "2" => Ok(Regularisation::II),
            "III" | "3" => Ok(Regularisation::III),
            _ => Err(QoscError::DomainError(format!("unknown regularisation {s:?}"))),
        }
    }
}

/// `(N+1)`-dimensional truncation with ratio `lambda / mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedHamiltonian {
    pub n: usize,
    pub reg: Regularisation,
    pub lambda_over_mu: C,
}

fn real_q(ctx: &QContext) -> Result<f64> {
    let q = ctx.q();
    if q.im != 0.0 || q.re <= 0.0 {
        return Err(QoscError::DomainError(format!("the spectral experiment needs 0 < q < 1, got {q}")));
    }
    Ok(q.re)
}

/// The truncated matrix, rows `0..N` transcribed from the three-term
/// equation and row `N` completed by the chosen regularisation.
pub fn build_truncated_h(p: TruncatedHamiltonian, ctx: &QContext) -> Result<DMatrix<C>> {
    if p.n < 1 {
        return Err(QoscError::DomainError("truncation needs N >= 1".into()));
    }
    if p.lambda_over_mu == ZERO {
        return Err(QoscError::DomainError("lambda/mu must be nonzero".into()));
    }
    let r = p.lambda_over_mu;
    let n = p.n;
    let mut h = DMatrix::zeros(n + 1, n + 1);
    for a in 0..=n {
        let ai = a as i64;
        let s = ctx.half_pow(-(2 * ai + 1));
        let up = (ONE - ctx.pow(2 * ai + 2)).sqrt();
        if a < n {
            h[(a, a + 1)] = s * r * up;
        } else {
            h[(a, a)] += s * up * p.reg.feedback();
        }
        if a > 0 {
            h[(a, a - 1)] = -s / r * (ONE - ctx.pow(2 * ai)).sqrt();
        }
    }
    Ok(h)
}

/// Gauge-fixed real form (`lambda/mu` removed by a diagonal similarity).
fn gauged(n: usize, reg: Regularisation, q: f64) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n + 1, n + 1);
    for a in 0..=n {
        let s = q.powf(-(a as f64) - 0.5);
        let up = (1.0 - q.powi(2 * a as i32 + 2)).sqrt();
        if a < n {
            h[(a, a + 1)] = s * up;
        } else {
            h[(a, a)] += s * up * reg.feedback();
        }
        if a > 0 {
            h[(a, a - 1)] = -s * (1.0 - q.powi(2 * a as i32)).sqrt();
        }
    }
    h
}

/// Last-row residual divided by `psi_N`, with `psi` from the first `N` rows.
fn boundary_function(h: &DMatrix<f64>, z: C) -> C {
    let n = h.nrows() - 1;
    let (mut prev, mut cur) = (ZERO, ONE);
    for a in 0..n {
        let sub = if a > 0 { h[(a, a - 1)] } else { 0.0 };
        let next = (z * cur - prev * sub) / h[(a, a + 1)];
        let s = next.norm().max(cur.norm()).max(1e-300);
        prev = cur / s;
        cur = next / s;
    }
    h[(n, n - 1)] * prev / cur + h[(n, n)] - z
}

fn polish(h: &DMatrix<f64>, z0: C) -> Result<C> {
    let mut z = z0;
    for _ in 0..60 {
        let d = 1e-7 * z.norm().max(1.0);
        let g = boundary_function(h, z);
        let dg = (boundary_function(h, z + d) - boundary_function(h, z - d)) / (2.0 * d);
        if !(dg.norm() > 0.0) || !g.re.is_finite() {
            break;
        }
        let step = g / dg;
        z -= step;
        if step.norm() <= 1e-14 * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    // a root of the boundary function must also be where the dense estimate was
    if (z - z0).norm() < 1e-3 * z0.norm().max(1.0) && boundary_function(h, z).norm() < 1e-6 * z.norm().max(1.0) {
        Ok(z)
    } else {
        Err(QoscError::EigensolverFailure(format!("Newton polish from {z0} did not settle")))
    }
}

fn sort_key(z: &C) -> (f64, f64) {
    (z.norm(), z.im)
}

/// Eigenvalues of the truncation, polished and sorted by modulus.
pub fn truncated_spectrum(n: usize, reg: Regularisation, ctx: &QContext) -> Result<Vec<C>> {
    let q = real_q(ctx)?;
    if n < 1 {
        return Err(QoscError::DomainError("truncation needs N >= 1".into()));
    }
    let h = gauged(n, reg, q);
    // Balance the off-diagonal pairs to equal modulus, then shift away from
    // the origin: the (III) truncation is skew-symmetric after balancing and
    // unshifted QR sweeps stall on it.
    let mut b = h.clone();
    for a in 0..n {
        let step = (h[(a + 1, a)] / h[(a, a + 1)]).abs().sqrt();
        b[(a, a + 1)] = h[(a, a + 1)] * step;
        b[(a + 1, a)] = h[(a + 1, a)] / step;
    }
    let shift = 0.375;
    for a in 0..=n {
        b[(a, a)] += shift;
    }
    let raw = nalgebra::Schur::try_new(b, f64::EPSILON, 100_000)
        .ok_or_else(|| QoscError::EigensolverFailure(format!("Schur iteration did not converge at N = {n}")))?
        .complex_eigenvalues();
    let mut out = raw.iter().map(|&z| polish(&h, z - shift)).collect::<Result<Vec<C>>>()?;
    out.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Predicted limits for the lowest branches: `q^{m+1/2} + q^{-m-1/2}` (I),
/// its negative (II), and the two parity-dependent imaginary sets (III).
pub fn branch_targets(n: usize, reg: Regularisation, q: f64) -> Vec<C> {
    let mut t: Vec<C> = match reg {
        Regularisation::I | Regularisation::II => {
            let sign = if reg == Regularisation::I { 1.0 } else { -1.0 };
            (0..BRANCHES).map(|m| C::new(sign * (q.powf(m as f64 + 0.5) + q.powf(-(m as f64) - 0.5)), 0.0)).collect()
        }
        Regularisation::III => {
            let mut v = Vec::new();
            if n.is_multiple_of(2) {
                v.push(ZERO);
            }
            let mut m = 0;
            while v.len() < BRANCHES {
                let k = if n % 2 == 1 { 2 * m + 1 } else { 2 * m + 2 } as f64;
                let h = q.powf(-k) - q.powf(k);
                v.push(I * h);
                v.push(-I * h);
                m += 1;
            }
            v.truncate(BRANCHES);
            v
        }
    };
    t.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).unwrap_or(std::cmp::Ordering::Equal));
    t
}

/// One truncation size in a convergence table.
#[derive(Debug, Clone)]
pub struct SpectralRow {
    pub n: usize,
    pub eigenvalues: Vec<C>,
    pub deviations: Vec<f64>,
}

/// Convergence of the lowest branches with the truncation size.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub q: f64,
    pub reg: Regularisation,
    pub rows: Vec<SpectralRow>,
}

impl SpectralReport {
    /// For regularisation III: lowest eigenvalue at the largest odd and the
    /// largest even `N` in the table.
    pub fn parity_limits(&self) -> (Option<C>, Option<C>) {
        let pick = |odd: bool| self.rows.iter().rev().find(|r| (r.n % 2 == 1) == odd).map(|r| r.eigenvalues[0]);
        (pick(true), pick(false))
    }
}

pub fn spectral_experiment(q: f64, n_list: &[usize], reg: Regularisation) -> Result<SpectralReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(QoscError::DomainError(format!("q must lie in (0, 1), got {q}")));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(QoscError::DomainError("N list must be increasing".into()));
    }
    let ctx = QContext::real(q)?;
    let rows = n_list
        .iter()
        .map(|&n| {
            let ev = truncated_spectrum(n, reg, &ctx)?;
            let targets = branch_targets(n, reg, q);
            let k = targets.len().min(ev.len());
            let eigenvalues: Vec<C> = ev[..k].to_vec();
            // conjugate pairs tie in modulus, so match each target to its nearest eigenvalue
            let deviations = targets
                .iter()
                .map(|t| ev.iter().map(|z| (z - t).norm()).fold(f64::INFINITY, f64::min))
                .collect();
            Ok(SpectralRow { n, eigenvalues, deviations })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralReport { q, reg, rows })
}

fn max_dev(row: &SpectralRow) -> f64 {
    if row.deviations.len() < BRANCHES {
        return f64::INFINITY;
    }
    row.deviations.iter().copied().fold(0.0, f64::max)
}

/// Branches (I) and (II) at size `n`; (II) is also compared to the
/// negated spectrum of (I).
pub fn spectrum_check(n: usize, reg: Regularisation, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let q = real_q(ctx)?;
    let id = match reg {
        Regularisation::I => "fock.spectrum.4_9",
        Regularisation::II => "fock.spectrum.4_10",
        Regularisation::III => return reg3_check(n | 1, (n + 1) & !1, ctx),
    };
    let report = spectral_experiment(q, &[n], reg)?;
    let mut residual = max_dev(&report.rows[0]);
    if reg == Regularisation::II {
        let mut a = truncated_spectrum(n, Regularisation::I, ctx)?;
        let mut b: Vec<C> = truncated_spectrum(n, Regularisation::II, ctx)?.iter().map(|z| -z).collect();
        let key = |z: &C| (z.re, z.im);
        a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        let mirror = a.iter().zip(&b).map(|(x, y)| (x - y).norm() / x.norm().max(1.0)).fold(0.0, f64::max);
        residual = residual.max(mirror);
    }
    Ok(IdentityReport::check(id, params![("q", q), ("N", n), ("reg", reg.to_string())], residual, SPECTRAL_TOL)
        .timed(start))
}

/// Regularisation (III): odd and even truncations approach their own
/// predicted sets, and the two lowest eigenvalues differ by more than 0.1.
pub fn reg3_check(n_odd: usize, n_even: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let q = real_q(ctx)?;
    if n_odd.is_multiple_of(2) || !n_even.is_multiple_of(2) {
        return Err(QoscError::DomainError("reg III check needs one odd and one even N".into()));
    }
    let (lo, hi) = if n_odd < n_even { (n_odd, n_even) } else { (n_even, n_odd) };
    let report = spectral_experiment(q, &[lo, hi], Regularisation::III)?;
    let mut residual = report.rows.iter().map(max_dev).fold(0.0, f64::max);
    if let (Some(a), Some(b)) = report.parity_limits() {
        if (a - b).norm() <= 0.1 {
            residual = f64::INFINITY;
        }
    }
    Ok(IdentityReport::check(
        "fock.spectrum_reg3.4_8",
        params![("q", q), ("N_odd", n_odd), ("N_even", n_even)],
        residual,
        SPECTRAL_TOL,
    )
    .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_matrix_layout() {
        let ctx = QContext::real(0.4).unwrap();
        let p = TruncatedHamiltonian { n: 1, reg: Regularisation::III, lambda_over_mu: C::new(1.5, 0.0) };
        let h = build_truncated_h(p, &ctx).unwrap();
        assert_eq!(h.nrows(), 2);
        assert_eq!(h[(1, 1)], ZERO);
        assert!((h[(0, 1)] - 1.5 * 0.4f64.powf(-0.5) * (1.0 - 0.16f64).sqrt()).norm() < 1e-14);
    }

    #[test]
    fn gauge_cancels() {
        let ctx = QContext::real(0.4).unwrap();
        let p = TruncatedHamiltonian { n: 6, reg: Regularisation::I, lambda_over_mu: C::new(0.7, 0.3) };
        let h = build_truncated_h(p, &ctx).unwrap();
        let g = gauged(6, Regularisation::I, 0.4).map(|x| C::new(x, 0.0));
        let mut a: Vec<C> = nalgebra::Schur::new(h).eigenvalues().unwrap().iter().copied().collect();
        let mut b: Vec<C> = nalgebra::Schur::new(g).eigenvalues().unwrap().iter().copied().collect();
        a.sort_by(|x, y| sort_key(x).partial_cmp(&sort_key(y)).unwrap());
        b.sort_by(|x, y| sort_key(x).partial_cmp(&sort_key(y)).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-6 * y.norm().max(1.0));
        }
    }

    #[test]
    fn branches_converge() {
        let ctx = QContext::real(0.4).unwrap();
        let r = spectrum_check(32, Regularisation::I, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = spectrum_check(32, Regularisation::II, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = reg3_check(31, 32, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
    }
}
