//! The deformation parameter and the truncation policy shared by every module.

use std::f64::consts::PI;
use std::ops::{Div, Mul};

use num_complex::Complex64;

use crate::error::{QoscError, Result};

pub type C = Complex64;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);
pub const I: C = C::new(0.0, 1.0);

/// Default relative bound for identity residuals.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Hard cap on the number of terms in any truncated series or product.
pub const DEFAULT_MAX_TERMS: usize = 10_000;
/// Number of consecutive negligible terms that ends a series.
pub const TAIL_RUN: usize = 3;

/// The nome `q` together with tolerances.
///
/// Immutable after construction. Half-integer powers always go through the
/// cached principal square root so every module sees the same branch.
#[derive(Debug, Clone)]
pub struct QContext {
    q: C,
    sqrt_q: C,
    quarter_q: C,
    ln_abs: f64,
    arg: f64,
    real_negative: bool,
    tol_identity: f64,
    tail_cut: f64,
    max_terms: usize,
}

impl QContext {
    pub fn new(q: C) -> Result<Self> {
        let modulus = q.norm();
        if !(modulus < 1.0) || !q.re.is_finite() || !q.im.is_finite() {
            return Err(QoscError::InvalidNome(modulus));
        }
        if modulus == 0.0 {
            return Err(QoscError::InvalidNome(modulus));
        }
        let sqrt_q = q.sqrt();
        Ok(Self {
            q,
            sqrt_q,
            quarter_q: sqrt_q.sqrt(),
            ln_abs: modulus.ln(),
            arg: q.arg(),
            real_negative: q.im == 0.0 && q.re < 0.0,
            tol_identity: DEFAULT_TOL,
            tail_cut: DEFAULT_TOL / 100.0,
            max_terms: DEFAULT_MAX_TERMS,
        })
    }

    pub fn real(q: f64) -> Result<Self> {
        Self::new(C::new(q, 0.0))
    }

    /// Sets the identity tolerance and resets the tail cut to `tol / 100`.
    pub fn with_tolerance(mut self, tol: f64) -> Result<Self> {
        self.tol_identity = tol;
        self.tail_cut = tol / 100.0;
        self.validate()
    }

    pub fn with_tail_cut(mut self, cut: f64) -> Result<Self> {
        self.tail_cut = cut;
        self.validate()
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Result<Self> {
        if max_terms == 0 {
            return Err(QoscError::InvalidContext("max_terms must be positive".into()));
        }
        self.max_terms = max_terms;
        Ok(self)
    }

    /// Same tolerances, different nome.
    pub fn with_q(&self, q: C) -> Result<Self> {
        let fresh = Self::new(q)?;
        Ok(Self {
            tol_identity: self.tol_identity,
            tail_cut: self.tail_cut,
            max_terms: self.max_terms,
            ..fresh
        })
    }

    fn validate(self) -> Result<Self> {
        if !(0.0 < self.tail_cut && self.tail_cut < self.tol_identity && self.tol_identity < 1.0) {
            return Err(QoscError::InvalidContext(format!(
                "need 0 < tail_cut ({:e}) < tol ({:e}) < 1",
                self.tail_cut, self.tol_identity
            )));
        }
        Ok(self)
    }

    pub fn q(&self) -> C {
        self.q
    }

    pub fn q2(&self) -> C {
        self.q * self.q
    }

    /// Principal `q^{1/2}`.
    pub fn sqrt_q(&self) -> C {
        self.sqrt_q
    }

    /// `q^{1/4}` as the principal root of the principal root.
    pub fn quarter_q(&self) -> C {
        self.quarter_q
    }

    pub fn tol(&self) -> f64 {
        self.tol_identity
    }

    pub fn tail_cut(&self) -> f64 {
        self.tail_cut
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// `q^n` by repeated squaring (exact sign for real `q`).
    pub fn pow(&self, n: i64) -> C {
        pow_int(self.q, n)
    }

    /// `q^{n/2}` on the cached branch.
    pub fn half_pow(&self, n: i64) -> C {
        let whole = self.pow(n.div_euclid(2));
        if n.rem_euclid(2) == 1 {
            whole * self.sqrt_q
        } else {
            whole
        }
    }

    /// `ln(q^n)` with the phase reduced exactly when `q` is real.
    pub fn ln_pow(&self, n: i64) -> C {
        let phase = if self.real_negative {
            PI * n.rem_euclid(2) as f64
        } else {
            self.arg * n as f64
        };
        C::new(self.ln_abs * n as f64, phase)
    }

    /// `ln(q^{n/2})` consistent with [`QContext::half_pow`].
    pub fn ln_half_pow(&self, n: i64) -> C {
        let phase = if self.real_negative {
            0.5 * PI * n.rem_euclid(4) as f64
        } else {
            0.5 * self.arg * n as f64
        };
        C::new(0.5 * self.ln_abs * n as f64, phase)
    }

    /// Sums `f(0) + f(1) + ...` with the tail rule: stop after
    /// [`TAIL_RUN`] consecutive terms below `tail_cut` times the largest term.
    pub fn sum_series<F: FnMut(usize) -> C>(&self, f: F) -> Result<SeriesSum> {
        self.sum_series_min(0, f)
    }

    /// As [`QContext::sum_series`] but never stops before `min_terms` terms.
    pub fn sum_series_min<F: FnMut(usize) -> C>(&self, min_terms: usize, mut f: F) -> Result<SeriesSum> {
        let mut acc = Accumulator::default();
        for n in 0..self.max_terms {
            acc.push(f(n), self.tail_cut);
            if n + 1 >= min_terms && acc.small_run >= TAIL_RUN {
                return Ok(acc.finish(n + 1));
            }
        }
        if acc.max_term == 0.0 {
            return Ok(acc.finish(self.max_terms));
        }
        Err(QoscError::TruncationExhausted(self.max_terms))
    }

    /// Sums over all integers, each direction truncated independently.
    pub fn sum_bilateral<F: FnMut(i64) -> C>(&self, min_terms: usize, mut f: F) -> Result<SeriesSum> {
        let mut acc = Accumulator::default();
        acc.push(f(0), self.tail_cut);
        let mut count = 1;
        for sign in [1i64, -1] {
            acc.small_run = 0;
            let mut done = false;
            for n in 1..self.max_terms as i64 {
                acc.push(f(sign * n), self.tail_cut);
                count += 1;
                if n as usize >= min_terms && acc.small_run >= TAIL_RUN {
                    done = true;
                    break;
                }
            }
            if !done && acc.max_term > 0.0 {
                return Err(QoscError::TruncationExhausted(self.max_terms));
            }
        }
        Ok(acc.finish(count))
    }

    /// Sums fallible terms `f(0) + f(1) + ...` with the tail rule, at most
    /// `cap` terms. Reaching the cap first raises [`QoscError::TailTooFat`].
    pub fn sum_capped<F: FnMut(usize) -> Result<C>>(&self, cap: usize, mut f: F) -> Result<SeriesSum> {
        let mut acc = Accumulator::default();
        let mut last = 0.0;
        for n in 0..cap {
            let t = f(n)?;
            last = t.norm();
            acc.push(t, self.tail_cut);
            if acc.small_run >= TAIL_RUN {
                return Ok(acc.finish(n + 1));
            }
        }
        if acc.max_term == 0.0 {
            return Ok(acc.finish(cap));
        }
        Err(QoscError::TailTooFat { last, cut: self.tail_cut * acc.max_term, cap })
    }

    /// Bilateral version of [`QContext::sum_capped`]; each direction gets
    /// its own cap and tail run.
    pub fn sum_bilateral_capped<F: FnMut(i64) -> Result<C>>(&self, cap: usize, mut f: F) -> Result<SeriesSum> {
        let mut acc = Accumulator::default();
        acc.push(f(0)?, self.tail_cut);
        let mut count = 1;
        for sign in [1i64, -1] {
            acc.small_run = 0;
            let mut last = 0.0;
            let mut done = false;
            for n in 1..=cap as i64 {
                let t = f(sign * n)?;
                last = t.norm();
                acc.push(t, self.tail_cut);
                count += 1;
                if acc.small_run >= TAIL_RUN {
                    done = true;
                    break;
                }
            }
            if !done && acc.max_term > 0.0 {
                return Err(QoscError::TailTooFat { last, cut: self.tail_cut * acc.max_term, cap });
            }
        }
        Ok(acc.finish(count))
    }

    /// `prod_{k>=0} (1 - c q^{e + step k})` in log form, with exact zero
    /// detection for the factor `c = 1`, exponent `0`.
    pub fn mono_poch_inf(&self, c: C, e: i64, step: i64) -> Result<LogVal> {
        debug_assert!(step > 0);
        let mut out = LogVal::one();
        if c == ZERO {
            return Ok(out);
        }
        let ratio = self.pow(step);
        let mut t = c * self.ln_pow(e).exp();
        let mut run = 0;
        for k in 0..self.max_terms as i64 {
            let exponent = e + step * k;
            if c == ONE && exponent == 0 {
                out.zeros += 1;
            } else {
                out.ln += (ONE - t).ln();
            }
            if t.norm() < self.tail_cut && exponent >= 0 {
                run += 1;
                if run >= TAIL_RUN {
                    return Ok(out);
                }
            } else {
                run = 0;
            }
            t *= ratio;
        }
        Err(QoscError::TruncationExhausted(self.max_terms))
    }

    /// `prod_{k=0}^{n-1} (1 - c q^{e + step k})`, extended to negative `n`
    /// by `(x; p)_{-n} = 1 / (x p^{-n}; p)_n`.
    pub fn mono_poch(&self, c: C, e: i64, step: i64, n: i64) -> LogVal {
        if n < 0 {
            return self.mono_poch(c, e + step * n, step, -n).inv();
        }
        let mut out = LogVal::one();
        for k in 0..n {
            let exponent = e + step * k;
            if c == ONE && exponent == 0 {
                out.zeros += 1;
            } else {
                out.ln += (ONE - c * self.ln_pow(exponent).exp()).ln();
            }
        }
        out
    }
}

/// `z^n` by repeated squaring; negative `n` inverts.
pub fn pow_int(z: C, n: i64) -> C {
    if n >= 0 {
        z.powi(n as i32)
    } else {
        z.inv().powi((-n) as i32)
    }
}

/// Result of a truncated series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: C,
    /// Sum of term moduli, the natural scale for cancellation-heavy sums.
    pub abs_sum: f64,
    pub terms: usize,
}

#[derive(Default)]
struct Accumulator {
    value: C,
    abs_sum: f64,
    max_term: f64,
    small_run: usize,
}

impl Accumulator {
    fn push(&mut self, t: C, cut: f64) {
        let a = t.norm();
        self.value += t;
        self.abs_sum += a;
        self.max_term = self.max_term.max(a);
        // leading exact zeros (e.g. delta-like weights) do not start the tail
        if self.max_term > 0.0 && a <= cut * self.max_term {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
    }

    fn finish(self, terms: usize) -> SeriesSum {
        SeriesSum { value: self.value, abs_sum: self.abs_sum, terms }
    }
}

/// A product kept as `(log of the nonzero part, number of exact zero factors)`.
///
/// Lets huge and tiny Pochhammer ratios combine without overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogVal {
    pub ln: C,
    pub zeros: i32,
}

impl LogVal {
    pub fn one() -> Self {
        Self { ln: ZERO, zeros: 0 }
    }

    pub fn from_c(z: C) -> Self {
        if z == ZERO {
            Self { ln: ZERO, zeros: 1 }
        } else {
            Self { ln: z.ln(), zeros: 0 }
        }
    }

    pub fn from_ln(ln: C) -> Self {
        Self { ln, zeros: 0 }
    }

    pub fn inv(self) -> Self {
        Self { ln: -self.ln, zeros: -self.zeros }
    }

    pub fn to_c(self) -> Result<C> {
        match self.zeros {
            z if z > 0 => Ok(ZERO),
            0 => Ok(self.ln.exp()),
            _ => Err(QoscError::PoleHit(format!("{} uncancelled zero factor(s) in a denominator", -self.zeros))),
        }
    }
}

impl Mul for LogVal {
    type Output = LogVal;
    fn mul(self, rhs: LogVal) -> LogVal {
        LogVal { ln: self.ln + rhs.ln, zeros: self.zeros + rhs.zeros }
    }
}

impl Div for LogVal {
    type Output = LogVal;
    fn div(self, rhs: LogVal) -> LogVal {
        self * rhs.inv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_nome() {
        assert!(matches!(QContext::real(1.0), Err(QoscError::InvalidNome(_))));
        assert!(QContext::new(C::new(0.8, 0.7)).is_err());
        assert!(QContext::real(0.4).unwrap().with_tolerance(2.0).is_err());
    }

    #[test]
    fn half_powers_share_branch() {
        let ctx = QContext::real(-0.3).unwrap();
        let h = ctx.half_pow(3);
        assert!((h - ctx.q() * ctx.sqrt_q()).norm() < 1e-16);
        assert!((ctx.ln_half_pow(3).exp() - h).norm() < 1e-15);
        assert!((ctx.half_pow(-1) * ctx.sqrt_q() - ONE).norm() < 1e-15);
        assert_eq!(ctx.ln_pow(7).im, PI);
    }

    #[test]
    fn geometric_series() {
        let ctx = QContext::real(0.5).unwrap();
        let s = ctx.sum_series(|n| ctx.pow(n as i64)).unwrap();
        assert!((s.value.re - 2.0).abs() < 1e-10);
        let b = ctx.sum_bilateral(0, |n| ctx.pow(n.abs() * n.abs())).unwrap();
        assert!(b.value.re > 2.0);
    }

    #[test]
    fn exact_zero_factor() {
        let ctx = QContext::real(0.4).unwrap();
        let p = ctx.mono_poch_inf(ONE, -4, 2).unwrap();
        assert_eq!(p.zeros, 1);
        assert_eq!(p.to_c().unwrap(), ZERO);
        let neg = ctx.mono_poch(C::new(0.3, 0.0), 0, 2, -2);
        let direct = 1.0 / ((1.0 - 0.3 * 0.4f64.powi(-4)) * (1.0 - 0.3 * 0.4f64.powi(-2)));
        assert!((neg.to_c().unwrap().re - direct).abs() < 1e-12 * direct.abs());
    }
}
