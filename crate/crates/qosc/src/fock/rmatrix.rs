//! The RLL relation on truncated Fock space and the factorised box
//! R-matrix with Fock weights.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::context::{QContext, C, ONE, ZERO};
use crate::error::{QoscError, Result};
use crate::fock::braces::FockOperators;
use crate::fock::vform::FockRepParams;
use crate::fock::weights::{measure, weight_v};
use crate::params;
use crate::qseries::br;
use crate::report::IdentityReport;

/// A 2x2 auxiliary matrix of quantum-space operators.
type AuxMatrix = [[DMatrix<C>; 2]; 2];

/// Which form of the RLL relation to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RllVariant {
    /// `L(lambda)` as is.
    Plain,
    /// `L(lambda) sigma_x` on both sides.
    SigmaX,
    /// Six-vertex entries `b` and `c` exchanged; must fail.
    Scrambled,
}

/// `L(lambda) = [[E-, -K/lambda], [lambda K', E+]]`.
pub fn l_operator(ops: &FockOperators, lambda: C, sigma_x: bool) -> AuxMatrix {
    let l = [
        [ops.e_minus.clone(), ops.k.map(|z| -z / lambda)],
        [ops.k_prime.map(|z| z * lambda), ops.e_plus.clone()],
    ];
    if sigma_x {
        let [[a, b], [c, d]] = l;
        [[b, a], [d, c]]
    } else {
        l
    }
}

/// Six-vertex R-matrix on the basis `00, 01, 10, 11`.
pub fn six_vertex(lambda: C, mu: C, ctx: &QContext) -> [[C; 4]; 4] {
    let a = br(ctx.q() * mu / lambda);
    let b = br(mu / lambda);
    let c = br(ctx.q());
    [[a, ZERO, ZERO, ZERO], [ZERO, b, c, ZERO], [ZERO, c, b, ZERO], [ZERO, ZERO, ZERO, a]]
}

/// Max of `|R L1 L2 - L2 L1 R|` over auxiliary components, restricted to
/// occupations `< a_max - 1`, relative to the largest entry of `R L1 L2`.
fn rll_residual(r: &[[C; 4]; 4], l1: &AuxMatrix, l2: &AuxMatrix, a_max: usize) -> f64 {
    let w = a_max - 1;
    let dim = l1[0][0].nrows();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i1 in 0..2 {
        for i2 in 0..2 {
            for k1 in 0..2 {
                for k2 in 0..2 {
                    let mut lhs = DMatrix::<C>::zeros(dim, dim);
                    let mut rhs = DMatrix::<C>::zeros(dim, dim);
                    for j1 in 0..2 {
                        for j2 in 0..2 {
                            let rl = r[2 * i1 + i2][2 * j1 + j2];
                            if rl != ZERO {
                                lhs += (&l1[j1][k1] * &l2[j2][k2]) * rl;
                            }
                            let rr = r[2 * j1 + j2][2 * k1 + k2];
                            if rr != ZERO {
                                rhs += (&l2[i2][j2] * &l1[i1][j1]) * rr;
                            }
                        }
                    }
                    for i in 0..w {
                        for j in 0..w {
                            worst = worst.max((lhs[(i, j)] - rhs[(i, j)]).norm());
                            scale = scale.max(lhs[(i, j)].norm());
                        }
                    }
                }
            }
        }
    }
    worst / scale.max(1e-300)
}

/// Tolerance for the RLL relation.
pub const RLL_TOL: f64 = 1e-12;

/// `R(lambda, mu) L(lambda) L(mu) = L(mu) L(lambda) R(lambda, mu)` on the
/// Fock representation `rep` truncated at `a_max`, for the chosen variant.
pub fn rll_check(
    lambda: C,
    mu: C,
    rep: FockRepParams,
    a_max: usize,
    variant: RllVariant,
    ctx: &QContext,
) -> Result<IdentityReport> {
    let start = Instant::now();
    if a_max < 3 {
        return Err(QoscError::DomainError("RLL check needs a_max >= 3".into()));
    }
    if lambda == ZERO || mu == ZERO {
        return Err(QoscError::DomainError("spectral parameters must be nonzero".into()));
    }
    let ops = FockOperators::new(rep.omega, rep.lambda, a_max, ctx);
    let sx = variant == RllVariant::SigmaX;
    let l1 = l_operator(&ops, lambda, sx);
    let l2 = l_operator(&ops, mu, sx);
    let mut r = six_vertex(lambda, mu, ctx);
    if variant == RllVariant::Scrambled {
        let (b, c) = (r[1][1], r[1][2]);
        r[1][1] = c;
        r[2][2] = c;
        r[1][2] = b;
        r[2][1] = b;
    }
    let residual = rll_residual(&r, &l1, &l2, a_max);
    let (id, p) = match variant {
        RllVariant::Plain => ("fock.rll.2_15", "plain"),
        RllVariant::SigmaX => ("fock.rll.2_15", "sigma_x"),
        RllVariant::Scrambled => ("fock.rll_scrambled.2_15", "scrambled"),
    };
    let params = params![("q", ctx.q()), ("lambda", lambda), ("mu", mu), ("A_max", a_max), ("variant", p)];
    let report = if variant == RllVariant::Scrambled {
        IdentityReport::negative_control(id, params, residual, RLL_TOL)
    } else {
        IdentityReport::check(id, params, residual, RLL_TOL)
    };
    Ok(report.timed(start))
}

/// Rapidities `(x, x')` and `(y, y')` of the two factors of a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxRapidities {
    pub x: C,
    pub xp: C,
    pub y: C,
    pub yp: C,
}

impl BoxRapidities {
    pub fn new(x: C, xp: C, y: C, yp: C) -> Result<Self> {
        if [x, xp, y, yp].contains(&ZERO) {
            return Err(QoscError::DomainError("rapidities must be nonzero".into()));
        }
        Ok(Self { x, xp, y, yp })
    }

    /// Ratios entering the four weights: left diagonal, two edges, right diagonal.
    fn ratios(&self, ctx: &QContext) -> [C; 4] {
        let q = ctx.q();
        [self.y / self.xp, self.x / self.y, self.xp / self.yp, q * q * self.yp / self.x]
    }
}

/// One matrix element of the box R-matrix,
/// `Vbar_{-q x'/y}(m1, m2) S_{m1} V_{x/y}(m1, m1') S_{m2} V_{x'/y'}(m2, m2') Vbar_{-x/(q y')}(m1', m2')`,
/// with `Vbar_z = V_{-q/z}`.
pub fn box_rmatrix_fock(r: BoxRapidities, spins: (i64, i64, i64, i64), ctx: &QContext) -> Result<C> {
    let (m1, m2, n1, n2) = spins;
    let [d0, e1, e2, d1] = r.ratios(ctx);
    Ok(weight_v(d0, m1, m2, ctx)?
        * measure(m1, ctx)
        * weight_v(e1, m1, n1, ctx)?
        * measure(m2, ctx)
        * weight_v(e2, m2, n2, ctx)?
        * weight_v(d1, n1, n2, ctx)?)
}

/// The box R-matrix on `0 <= m1, m2 <= cutoff`, row index `m1 (cutoff+1) + m2`.
pub fn box_matrix(r: BoxRapidities, cutoff: usize, ctx: &QContext) -> Result<DMatrix<C>> {
    let n = cutoff + 1;
    let [d0, e1, e2, d1] = r.ratios(ctx);
    let table = |z: C| -> Result<DMatrix<C>> {
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] = weight_v(z, i as i64, j as i64, ctx)?;
            }
        }
        Ok(t)
    };
    let (t0, t1, t2, t3) = (table(d0)?, table(e1)?, table(e2)?, table(d1)?);
    let s: Vec<C> = (0..n as i64).map(|m| measure(m, ctx)).collect();
    Ok(DMatrix::from_fn(n * n, n * n, |row, col| {
        let (m1, m2, n1, n2) = (row / n, row % n, col / n, col % n);
        t0[(m1, m2)] * s[m1] * t1[(m1, n1)] * s[m2] * t2[(m2, n2)] * t3[(n1, n2)]
    }))
}

/// The L-operator of the representation with `omega = sqrt(x x')`,
/// `mu = sqrt(x/x')` in the eigenbasis of `H`, truncated at `cutoff`.
/// A state `|xi>` with `xi = q^{m+1/2}` is shifted to `|q^{+-1} xi>`;
/// `m = -1` is identified with `m = 0`.
fn vform_l(x: C, xp: C, cutoff: usize, ctx: &QContext) -> AuxMatrix {
    let omega = (x * xp).sqrt();
    let mu = (x / xp).sqrt();
    let n = cutoff + 1;
    let mut k0 = DMatrix::<C>::zeros(n, n);
    let mut ep = DMatrix::<C>::zeros(n, n);
    let mut em = DMatrix::<C>::zeros(n, n);
    for m in 0..n {
        let xi = ctx.half_pow(2 * m as i64 + 1);
        let d = br(xi);
        let up = m + 1;
        let dn = m.saturating_sub(1);
        let add = |mat: &mut DMatrix<C>, k: usize, c: C| {
            if k < n {
                mat[(k, m)] += c;
            }
        };
        add(&mut k0, up, d.inv());
        add(&mut k0, dn, -d.inv());
        add(&mut ep, dn, xi / mu / d);
        add(&mut ep, up, -ONE / (xi * mu * d));
        add(&mut em, up, mu * xi / d);
        add(&mut em, dn, -mu / (xi * d));
    }
    [[em, k0.map(|z| -z * omega)], [k0.map(|z| z / omega), ep]]
}

fn coproduct(a: &AuxMatrix, b: &AuxMatrix) -> AuxMatrix {
    let entry = |i: usize, k: usize| a[i][0].kronecker(&b[0][k]) + a[i][1].kronecker(&b[1][k]);
    [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]
}

/// Tolerance for the truncated intertwining relation.
pub const BOX_TOL: f64 = 1e-5;

/// `Delta_{x,x'|y,y'}(L) S = S Delta_{y,y'|x,x'}(L)` for all four auxiliary
/// components, compared on spins `m1, m2 < cutoff`, relative to the largest
/// entry of the left side.
pub fn box_intertwining_check(r: BoxRapidities, cutoff: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    if cutoff < 2 {
        return Err(QoscError::DomainError("box intertwining needs cutoff >= 2".into()));
    }
    let s = box_matrix(r, cutoff, ctx)?;
    let lx = vform_l(r.x, r.xp, cutoff, ctx);
    let ly = vform_l(r.y, r.yp, cutoff, ctx);
    let a = coproduct(&lx, &ly);
    let b = coproduct(&ly, &lx);
    let n = cutoff + 1;
    let inner: Vec<usize> = (0..cutoff).flat_map(|m1| (0..cutoff).map(move |m2| m1 * n + m2)).collect();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..2 {
        for k in 0..2 {
            let lhs = &a[i][k] * &s;
            let rhs = &s * &b[i][k];
            for &row in &inner {
                for &col in &inner {
                    worst = worst.max((lhs[(row, col)] - rhs[(row, col)]).norm());
                    scale = scale.max(lhs[(row, col)].norm());
                }
            }
        }
    }
    Ok(IdentityReport::check(
        "fock.box_intertwining.4_54",
        params![("q", ctx.q()), ("x", r.x), ("x'", r.xp), ("y", r.y), ("y'", r.yp), ("cutoff", cutoff)],
        worst / scale.max(1e-300),
        BOX_TOL,
    )
    .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep() -> FockRepParams {
        FockRepParams::new(C::from_polar(0.9, 0.3), C::new(1.1, 0.0), ONE).unwrap()
    }

    #[test]
    fn rll_holds_and_scrambled_fails() {
        let ctx = QContext::real(0.4).unwrap();
        let (l, m) = (C::from_polar(1.3, 0.2), C::from_polar(0.7, -0.4));
        for v in [RllVariant::Plain, RllVariant::SigmaX] {
            let r = rll_check(l, m, rep(), 8, v, &ctx).unwrap();
            assert!(r.passed(), "{v:?}: {}", r.residual);
        }
        let r = rll_check(l, m, rep(), 8, RllVariant::Scrambled, &ctx).unwrap();
        assert!(r.residual > 1e-3, "{}", r.residual);
    }

    #[test]
    fn box_reflection_invariance() {
        let ctx = QContext::real(0.35).unwrap();
        let r = BoxRapidities::new(C::from_polar(0.7, 0.2), C::from_polar(1.3, -0.4), C::from_polar(0.9, 0.5), C::from_polar(0.6, 0.1))
            .unwrap();
        let base = box_rmatrix_fock(r, (1, 2, 0, 3), &ctx).unwrap();
        for s in [(-2, 2, 0, 3), (1, -3, 0, 3), (1, 2, -1, 3), (1, 2, 0, -4)] {
            let v = box_rmatrix_fock(r, s, &ctx).unwrap();
            assert!((v - base).norm() < 1e-10 * base.norm(), "{s:?}");
        }
    }

    #[test]
    fn box_coincident_rapidities_diagonal() {
        let ctx = QContext::real(0.35).unwrap();
        let x = C::from_polar(0.8, 0.3);
        let xp = C::from_polar(1.2, -0.2);
        let r = BoxRapidities::new(x, xp, x, xp).unwrap();
        assert_eq!(box_rmatrix_fock(r, (1, 2, 0, 2), &ctx).unwrap(), ZERO);
        assert!(box_rmatrix_fock(r, (1, 2, 1, 2), &ctx).unwrap().norm() > 0.0);
    }

    #[test]
    fn box_intertwines_small_cutoff() {
        let ctx = QContext::real(0.35).unwrap();
        let r = BoxRapidities::new(C::from_polar(0.7, 0.2), C::from_polar(1.3, -0.4), C::from_polar(0.9, 0.5), C::from_polar(0.6, 0.1))
            .unwrap();
        let rep = box_intertwining_check(r, 10, &ctx).unwrap();
        assert!(rep.passed(), "{}", rep.residual);
    }
}
