//! Clebsch-Gordan braces `{a, b, c}` and the coefficients built from them.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use twofloat::TwoFloat;

use crate::context::{QContext, C, ONE, ZERO};
use crate::error::{QoscError, Result};
use crate::fock::vform::FockRepParams;
use crate::orthopoly::sqrt_q2_poch;
use crate::params;
use crate::report::{rel_residual, IdentityReport};

/// Largest index accepted by [`brace`].
pub const BRACE_MAX: usize = 30;

/// How a brace is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BraceMethod {
    /// Spin sum over the cubic product of polynomials.
    SpinSum,
    /// Finite alternating sum, manifestly symmetric.
    ClosedForm,
    /// Recursion in `c` from `{a, b, 0} = q^{ab}`.
    Recursion,
}

impl BraceMethod {
    pub const ALL: [BraceMethod; 3] = [BraceMethod::SpinSum, BraceMethod::ClosedForm, BraceMethod::Recursion];
}

fn guard(a: usize, b: usize, c: usize) -> Result<()> {
    if a.max(b).max(c) > BRACE_MAX {
        Err(QoscError::OverflowGuard(format!("brace index above {BRACE_MAX}")))
    } else {
        Ok(())
    }
}

/// `{a, b, c}` by the selected method.
pub fn brace(a: usize, b: usize, c: usize, method: BraceMethod, ctx: &QContext) -> Result<C> {
    guard(a, b, c)?;
    match method {
        BraceMethod::SpinSum => spin_sum(a, b, c, ctx),
        BraceMethod::ClosedForm => Ok(closed_form(a, b, c, ctx)),
        BraceMethod::Recursion => Ok(recursion(a, b, c, ctx)),
    }
}

/// Spin sum in double-double arithmetic. The alternating series cancels to
/// values up to twenty orders below its largest terms, beyond `f64` reach.
fn spin_sum(a: usize, b: usize, c: usize, ctx: &QContext) -> Result<C> {
    let one = Dd::real(1.0);
    let q = Dd::from(ctx.q());
    let r = Dd::from(ctx.sqrt_q());
    // one Newton step lifts the square root to full precision
    let r = r + (q - r * r) * (r + r).inv();
    let q3 = q * q * q;
    let top = a.max(b).max(c);
    let mut seq = vec![one; top + 1];
    let mut acc = Dd::real(0.0);
    let mut largest = 0.0f64;
    let mut run = 0;
    let mut xi = r;
    let (mut weight, mut step) = (one, q3);
    for m in 0..ctx.max_terms() {
        let h = xi + xi.inv();
        let (mut prev, mut half, mut q2n) = (Dd::real(0.0), r, one);
        for n in 0..top {
            let next = half * h * seq[n] + (one - q2n) * prev;
            prev = seq[n];
            seq[n + 1] = next;
            half = half * q;
            q2n = q2n * q * q;
        }
        let term = weight * (xi - xi.inv()) * seq[a] * seq[b] * seq[c];
        acc = if m % 2 == 0 { acc + term } else { acc - term };
        let size = term.norm();
        largest = largest.max(size);
        if m > top + 1 && size <= EXTENDED_CUT * largest {
            run += 1;
            if run >= crate::context::TAIL_RUN {
                // M_F = -q^{-1/2} (q; q)_inf, also to full precision
                let mut poch = one;
                let mut qk = q;
                while qk.norm() > EXTENDED_CUT {
                    poch = poch * (one - qk);
                    qk = qk * q;
                }
                return Ok(C::from(Dd::real(0.0) - acc * r * poch.inv()));
            }
        } else {
            run = 0;
        }
        xi = xi * q;
        weight = weight * step;
        step = step * q3;
    }
    Err(QoscError::TruncationExhausted(ctx.max_terms()))
}

/// Terms below this fraction of the largest one end the spin sum.
const EXTENDED_CUT: f64 = 1e-34;

/// Double-double reciprocal by one Newton step; the crate's own division
/// drops the low word.
fn inv(x: TwoFloat) -> TwoFloat {
    let y = TwoFloat::from(1.0 / x.hi());
    y + y * (TwoFloat::from(1.0) - x * y)
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy)]
struct Dd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Dd {
    fn real(x: f64) -> Self {
        Self { re: TwoFloat::from(x), im: TwoFloat::from(0.0) }
    }

    fn inv(self) -> Self {
        let n = inv(self.re * self.re + self.im * self.im);
        Self { re: self.re * n, im: -(self.im * n) }
    }

    fn norm(self) -> f64 {
        self.re.hi().hypot(self.im.hi())
    }
}

impl From<C> for Dd {
    fn from(z: C) -> Self {
        Self { re: TwoFloat::from(z.re), im: TwoFloat::from(z.im) }
    }
}

impl From<Dd> for C {
    fn from(z: Dd) -> Self {
        C::new(f64::from(z.re), f64::from(z.im))
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        Dd { re: self.re + o.re, im: self.im + o.im }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        Dd { re: self.re - o.re, im: self.im - o.im }
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        Dd { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

fn q2_poch(n: usize, ctx: &QContext) -> C {
    (1..=n as i64).map(|k| ONE - ctx.pow(2 * k)).product()
}

fn closed_form(a: usize, b: usize, c: usize, ctx: &QContext) -> C {
    let mut v = [a, b, c];
    v.sort_unstable();
    let [a, b, c] = v;
    let (ai, bi, ci) = (a as i64, b as i64, c as i64);
    let pre = q2_poch(a, ctx) * q2_poch(b, ctx) * q2_poch(c, ctx);
    let cross = ai * bi + ai * ci + bi * ci;
    let sum: C = (0..=a)
        .map(|k| {
            let ki = k as i64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let den = q2_poch(k, ctx) * q2_poch(a - k, ctx) * q2_poch(b - k, ctx) * q2_poch(c - k, ctx);
            ctx.pow(cross + 3 * ki * ki - ki - 2 * ki * (ai + bi + ci)) / den * sign
        })
        .sum();
    pre * sum
}

fn recursion(a: usize, b: usize, c: usize, ctx: &QContext) -> C {
    // t[i][k] = {a - i, b - i, k}
    let depth = a.min(b);
    let mut t = vec![vec![ZERO; c + 1]; depth + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = ctx.pow(((a - i) * (b - i)) as i64);
    }
    for k in 1..=c {
        for i in 0..=depth {
            let (ai, bi) = ((a - i) as i64, (b - i) as i64);
            let lower = if i < depth {
                (ONE - ctx.pow(2 * ai)) * (ONE - ctx.pow(2 * bi)) / ctx.q() * t[i + 1][k - 1]
            } else {
                ZERO
            };
            t[i][k] = ctx.pow(ai + bi) * t[i][k - 1] - lower;
        }
    }
    t[0][c]
}

/// Braces on the box `[0, a_max]^3`.
#[derive(Debug, Clone)]
pub struct BraceTensor {
    pub a_max: usize,
    pub method: BraceMethod,
    values: Vec<C>,
}

impl BraceTensor {
    /// Fills the box in parallel over independent entries.
    pub fn build(a_max: usize, method: BraceMethod, ctx: &QContext) -> Result<Self> {
        let n = a_max + 1;
        let values = (0..n * n * n)
            .into_par_iter()
            .map(|i| brace(i / (n * n), (i / n) % n, i % n, method, ctx))
            .collect::<Result<Vec<C>>>()?;
        Ok(Self { a_max, method, values })
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> C {
        let n = self.a_max + 1;
        self.values[(a * n + b) * n + c]
    }
}

/// Pairwise agreement of the three methods at one index triple.
pub fn brace_check(a: usize, b: usize, c: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let v: Vec<C> = BraceMethod::ALL.iter().map(|&m| brace(a, b, c, m, ctx)).collect::<Result<_>>()?;
    let residual = rel_residual(v[0], v[1]).max(rel_residual(v[0], v[2])).max(rel_residual(v[1], v[2]));
    Ok(IdentityReport::check(
        "fock.brace.4_27_4_28_4_39",
        params![("q", ctx.q()), ("a", a), ("b", b), ("c", c)],
        residual,
        ctx.tol(),
    )
    .timed(start))
}

/// Which side of the coproduct decomposition a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgSide {
    /// `<a, b || omega, c>`.
    Ket,
    /// `<omega, c || a, b>`.
    Bra,
}

/// Symmetric Clebsch-Gordan coefficient; `p1`, `p2` supply `omega_i`, `lambda_i`.
pub fn cg_coefficient(
    side: CgSide,
    (a, b, c): (usize, usize, usize),
    p1: FockRepParams,
    p2: FockRepParams,
    omega: C,
    ctx: &QContext,
) -> Result<C> {
    let braces = brace(a, b, c, BraceMethod::ClosedForm, ctx)?;
    Ok(cg_dress(side, (a, b, c), p1, p2, omega, braces, ctx))
}

fn cg_dress(
    side: CgSide,
    (a, b, c): (usize, usize, usize),
    p1: FockRepParams,
    p2: FockRepParams,
    omega: C,
    braces: C,
    ctx: &QContext,
) -> C {
    let (o1, o2) = (p1.omega, p2.omega);
    let fa = omega / (o2 * p1.lambda);
    let fb = o1 / (omega * p2.lambda);
    let norm = sqrt_q2_poch(a, ctx) * sqrt_q2_poch(b, ctx) * sqrt_q2_poch(c, ctx);
    let (sa, sb, fc) = match side {
        CgSide::Ket => (a as i32, b as i32, -ctx.q() * o2 / o1),
        CgSide::Bra => (-(a as i32), -(b as i32), -ctx.q() * o1 / o2),
    };
    fa.powi(sa) * fb.powi(sb) * fc.powi(c as i32) * braces / norm
}

/// Truncated matrices of `E-`, `E+`, `K`, `K'` on occupations `0..=a_max`.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub e_minus: DMatrix<C>,
    pub e_plus: DMatrix<C>,
    pub k: DMatrix<C>,
    pub k_prime: DMatrix<C>,
}

impl FockOperators {
    pub fn new(omega: C, lambda: C, a_max: usize, ctx: &QContext) -> Self {
        let n = a_max + 1;
        let mut e_minus = DMatrix::zeros(n, n);
        let mut e_plus = DMatrix::zeros(n, n);
        let mut k = DMatrix::zeros(n, n);
        let mut k_prime = DMatrix::zeros(n, n);
        for a in 0..n {
            let ai = a as i64;
            if a > 0 {
                e_minus[(a - 1, a)] = lambda * (ONE - ctx.pow(2 * ai)).sqrt();
            }
            if a < a_max {
                e_plus[(a + 1, a)] = (ONE - ctx.pow(2 * ai + 2)).sqrt() / lambda;
            }
            let d = ctx.half_pow(2 * ai + 1);
            k[(a, a)] = omega * d;
            k_prime[(a, a)] = d / omega;
        }
        Self { e_minus, e_plus, k, k_prime }
    }

    /// Coproducts `(Delta E-, Delta K, Delta E+)` on the tensor square.
    pub fn coproduct(&self, other: &FockOperators) -> (DMatrix<C>, DMatrix<C>, DMatrix<C>) {
        let em = self.e_minus.kronecker(&other.e_minus) - self.k.kronecker(&other.k_prime);
        let k = self.e_minus.kronecker(&other.k) + self.k.kronecker(&other.e_plus);
        let ep = self.e_plus.kronecker(&other.e_plus) - self.k_prime.kronecker(&other.k);
        (em, k, ep)
    }
}

struct CgSetup {
    n: usize,
    em: DMatrix<C>,
    k: DMatrix<C>,
    ep: DMatrix<C>,
    braces: BraceTensor,
}

impl CgSetup {
    fn new(p1: FockRepParams, p2: FockRepParams, a_max: usize, ctx: &QContext) -> Result<Self> {
        let f1 = FockOperators::new(p1.omega, p1.lambda, a_max, ctx);
        let f2 = FockOperators::new(p2.omega, p2.lambda, a_max, ctx);
        let (em, k, ep) = f1.coproduct(&f2);
        let braces = BraceTensor::build(a_max, BraceMethod::ClosedForm, ctx)?;
        Ok(Self { n: a_max + 1, em, k, ep, braces })
    }

    fn vector(&self, side: CgSide, c: usize, p1: FockRepParams, p2: FockRepParams, omega: C, ctx: &QContext) -> Vec<C> {
        let mut v = Vec::with_capacity(self.n * self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                let braces = self.braces.get(a, b, c);
                v.push(cg_dress(side, (a, b, c), p1, p2, omega, braces, ctx));
            }
        }
        v
    }

    /// Flat indices with both occupations at most `w`.
    fn window(&self, w: usize) -> Vec<usize> {
        (0..=w).flat_map(|a| (0..=w).map(move |b| (a, b))).map(|(a, b)| a * self.n + b).collect()
    }
}

fn apply(m: &DMatrix<C>, v: &[C]) -> Vec<C> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

fn apply_left(v: &[C], m: &DMatrix<C>) -> Vec<C> {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| v[i] * m[(i, j)]).sum()).collect()
}

fn window_residual(lhs: &[C], rhs: &[C], idx: &[usize]) -> f64 {
    let diff = idx.iter().map(|&i| (lhs[i] - rhs[i]).norm()).fold(0.0, f64::max);
    let scale = idx.iter().map(|&i| lhs[i].norm().max(rhs[i].norm())).fold(1e-300, f64::max);
    diff / scale
}

fn cg_params(p1: FockRepParams, p2: FockRepParams, omega: C, a_max: usize, ctx: &QContext) -> crate::report::Params {
    params![
        ("q", ctx.q()),
        ("omega", omega),
        ("omega1", p1.omega),
        ("omega2", p2.omega),
        ("lambda1", p1.lambda),
        ("lambda2", p2.lambda),
        ("a_max", a_max)
    ]
}

/// Vacuum equations for the `c = 0` ket column and its closed form.
pub fn cg_vacuum_check(p1: FockRepParams, p2: FockRepParams, omega: C, a_max: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let s = CgSetup::new(p1, p2, a_max, ctx)?;
    let v0 = s.vector(CgSide::Ket, 0, p1, p2, omega, ctx);
    let idx = s.window(a_max - 1);
    let kq = omega * ctx.sqrt_q();
    let scaled: Vec<C> = v0.iter().map(|&x| x * kq).collect();
    // annihilation is measured against the scale of the vector itself
    let em_v = apply(&s.em, &v0);
    let scale = idx.iter().map(|&i| v0[i].norm()).fold(1e-300, f64::max);
    let mut worst = idx.iter().map(|&i| em_v[i].norm()).fold(0.0, f64::max) / scale;
    worst = worst.max(window_residual(&apply(&s.k, &v0), &scaled, &idx));
    let fa = omega / (p2.omega * p1.lambda);
    let fb = p1.omega / (omega * p2.lambda);
    for a in 0..=a_max {
        for b in 0..=a_max {
            let closed = fa.powi(a as i32) * fb.powi(b as i32) * ctx.pow((a * b) as i64)
                / (sqrt_q2_poch(a, ctx) * sqrt_q2_poch(b, ctx));
            worst = worst.max(rel_residual(v0[a * s.n + b], closed));
        }
    }
    Ok(IdentityReport::check("fock.cg_vacuum.4_36_4_37", cg_params(p1, p2, omega, a_max, ctx), worst, ctx.tol())
        .timed(start))
}

/// `Delta(E+) ||omega, c> = sqrt(1 - q^{2c+2}) ||omega, c+1>` for `c <= c_max`.
pub fn cg_raising_check(
    p1: FockRepParams,
    p2: FockRepParams,
    omega: C,
    a_max: usize,
    c_max: usize,
    ctx: &QContext,
) -> Result<IdentityReport> {
    let start = Instant::now();
    if c_max + 1 > a_max {
        return Err(QoscError::DomainError("raising check needs c_max < a_max".into()));
    }
    let s = CgSetup::new(p1, p2, a_max, ctx)?;
    let idx = s.window(a_max - 1);
    let mut worst = 0.0f64;
    let mut cur = s.vector(CgSide::Ket, 0, p1, p2, omega, ctx);
    for c in 0..=c_max {
        let next = s.vector(CgSide::Ket, c + 1, p1, p2, omega, ctx);
        let f = (ONE - ctx.pow(2 * c as i64 + 2)).sqrt();
        let rhs: Vec<C> = next.iter().map(|&x| x * f).collect();
        worst = worst.max(window_residual(&apply(&s.ep, &cur), &rhs, &idx));
        cur = next;
    }
    let mut p = cg_params(p1, p2, omega, a_max, ctx);
    p.insert("c_max".into(), c_max.to_string());
    Ok(IdentityReport::check("fock.cg_raising.4_38", p, worst, ctx.tol()).timed(start))
}

/// Co-vacuum and lowering equations for the bra coefficients.
pub fn cg_dual_check(
    p1: FockRepParams,
    p2: FockRepParams,
    omega: C,
    a_max: usize,
    c_max: usize,
    ctx: &QContext,
) -> Result<IdentityReport> {
    let start = Instant::now();
    if c_max + 1 > a_max {
        return Err(QoscError::DomainError("dual check needs c_max < a_max".into()));
    }
    let s = CgSetup::new(p1, p2, a_max, ctx)?;
    let idx = s.window(a_max - 1);
    let b0 = s.vector(CgSide::Bra, 0, p1, p2, omega, ctx);
    let scale = idx.iter().map(|&i| b0[i].norm()).fold(1e-300, f64::max);
    let ann = apply_left(&b0, &s.ep);
    let mut worst = idx.iter().map(|&i| ann[i].norm()).fold(0.0, f64::max) / scale;
    let kq = omega * ctx.sqrt_q();
    let scaled: Vec<C> = b0.iter().map(|&x| x * kq).collect();
    worst = worst.max(window_residual(&apply_left(&b0, &s.k), &scaled, &idx));
    let mut cur = b0;
    for c in 0..=c_max {
        let next = s.vector(CgSide::Bra, c + 1, p1, p2, omega, ctx);
        let f = (ONE - ctx.pow(2 * c as i64 + 2)).sqrt();
        let rhs: Vec<C> = next.iter().map(|&x| x * f).collect();
        worst = worst.max(window_residual(&apply_left(&cur, &s.em), &rhs, &idx));
        cur = next;
    }
    let mut p = cg_params(p1, p2, omega, a_max, ctx);
    p.insert("c_max".into(), c_max.to_string());
    Ok(IdentityReport::check("fock.cg_dual.4_40", p, worst, ctx.tol()).timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let ctx = QContext::real(0.4).unwrap();
        for m in BraceMethod::ALL {
            // the spin sum stops at the default tail cut, hence 1e-10
            assert!(rel_residual(brace(1, 1, 1, m, &ctx).unwrap(), C::new(-1.7, 0.0)) < 1e-10, "{m:?}");
            assert!(rel_residual(brace(2, 1, 1, m, &ctx).unwrap(), C::new(-2.036, 0.0)) < 1e-10, "{m:?}");
            assert!(rel_residual(brace(2, 2, 2, m, &ctx).unwrap(), C::new(4.010896, 0.0)) < 1e-10, "{m:?}");
            assert!(rel_residual(brace(3, 2, 0, m, &ctx).unwrap(), ctx.pow(6)) < 1e-10, "{m:?}");
        }
        assert!(brace(31, 0, 0, BraceMethod::ClosedForm, &ctx).is_err());
    }

    #[test]
    fn closed_form_is_symmetric_bitwise() {
        let ctx = QContext::real(0.3).unwrap();
        let a = brace(4, 2, 3, BraceMethod::ClosedForm, &ctx).unwrap();
        assert_eq!(a, brace(3, 4, 2, BraceMethod::ClosedForm, &ctx).unwrap());
        assert_eq!(a, brace(2, 3, 4, BraceMethod::ClosedForm, &ctx).unwrap());
    }

    #[test]
    fn tensor_and_agreement() {
        let ctx = QContext::real(0.5).unwrap();
        let t = BraceTensor::build(4, BraceMethod::Recursion, &ctx).unwrap();
        assert!(rel_residual(t.get(1, 1, 1), brace(1, 1, 1, BraceMethod::SpinSum, &ctx).unwrap()) < 1e-10);
        assert!(brace_check(4, 3, 2, &ctx).unwrap().passed());
    }

    #[test]
    fn clebsch_gordan_equations() {
        let ctx = QContext::real(0.4).unwrap();
        let p1 = FockRepParams::new(C::from_polar(1.0, 0.3), C::new(1.1, 0.0), ONE).unwrap();
        let p2 = FockRepParams::new(C::from_polar(1.0, -0.5), C::from_polar(0.8, 0.2), ONE).unwrap();
        let omega = C::from_polar(1.0, 0.9);
        let r = cg_vacuum_check(p1, p2, omega, 12, &ctx).unwrap();
        assert!(r.passed(), "vacuum {}", r.residual);
        let r = cg_raising_check(p1, p2, omega, 14, 6, &ctx).unwrap();
        assert!(r.passed(), "raising {}", r.residual);
        let r = cg_dual_check(p1, p2, omega, 14, 5, &ctx).unwrap();
        assert!(r.passed(), "dual {}", r.residual);
    }
}
