//! The reducible representation `V_gamma` on spins `m in Z`: its split into
//! two Fock spaces, the projector weights `V^(eps)`, the bold weights of the
//! rational Kashiwara-Miwa model and their star-triangle relation.

use std::time::Instant;

use crate::context::{LogVal, QContext, C, I, ONE, ZERO};
use crate::error::{QoscError, Result};
use crate::fock::braces::{brace, BraceMethod};
use crate::fock::vform::chi_column;
use crate::fock::weights::nf;
use crate::orthopoly::p_normalized_sequence;
use crate::params;
use crate::qseries::{br, qpoch_inf, qpoch_inf_multi, theta_product, ThetaKind};
use crate::report::{rel_residual, rel_residual_scaled, IdentityReport};

/// Smallest admissible `|[gamma q^m]|` on the spin window.
pub const MEASURE_FLOOR: f64 = 1e-12;

/// Cap on adaptive sums over occupation numbers.
const OCCUPATION_CAP: usize = 400;

/// `gamma`, its optional selected parity `nu` (as `2 nu`), and the spin
/// window `[-M, M]` used by bilateral sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaContext {
    gamma: C,
    two_nu: Option<i32>,
    window: usize,
}

impl GammaContext {
    /// A generic `gamma`; rejects windows where the measure degenerates.
    pub fn generic(gamma: C, window: usize, ctx: &QContext) -> Result<Self> {
        let gc = Self { gamma, two_nu: None, window };
        gc.validate(ctx)?;
        Ok(gc)
    }

    /// The selected value `gamma = i q^nu`, built exactly from `2 nu`.
    pub fn selected(two_nu: i32, window: usize, ctx: &QContext) -> Result<Self> {
        let gc = Self { gamma: I * ctx.half_pow(two_nu as i64), two_nu: Some(two_nu), window };
        gc.validate(ctx)?;
        Ok(gc)
    }

    fn validate(&self, ctx: &QContext) -> Result<()> {
        if self.gamma == ZERO || !self.gamma.re.is_finite() || !self.gamma.im.is_finite() {
            return Err(QoscError::DomainError(format!("gamma must be finite and nonzero, got {}", self.gamma)));
        }
        let w = self.window as i64;
        for m in -w..=w {
            let value = self.measure(m, ctx).norm();
            if value < MEASURE_FLOOR {
                return Err(QoscError::SingularMeasure { m, value });
            }
        }
        Ok(())
    }

    pub fn gamma(&self) -> C {
        self.gamma
    }

    /// `nu` when built by [`GammaContext::selected`].
    pub fn nu(&self) -> Option<f64> {
        self.two_nu.map(|t| t as f64 / 2.0)
    }

    pub fn is_selected(&self) -> bool {
        self.two_nu.is_some()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// `[gamma q^m]`.
    pub fn measure(&self, m: i64, ctx: &QContext) -> C {
        br(self.gamma * ctx.pow(m))
    }

    fn label(&self) -> String {
        match self.two_nu {
            Some(t) => format!("i q^({}/2)", t),
            None => crate::report::ParamValue::param(&self.gamma),
        }
    }
}

/// `z * exp(ln)`, formed in log space so that huge and tiny factors meet
/// without overflow.
fn times_exp(z: C, ln: C) -> C {
    if z == ZERO {
        ZERO
    } else {
        (z.ln() + ln).exp()
    }
}

fn sign(even: bool) -> f64 {
    if even {
        1.0
    } else {
        -1.0
    }
}

/// `(-1)^n` for `n in Z`.
fn parity(n: i64) -> f64 {
    sign(n.rem_euclid(2) == 0)
}

/// `eps^n` for `eps = +-1`.
fn eps_pow(eps: i8, n: i64) -> f64 {
    if eps > 0 {
        1.0
    } else {
        parity(n)
    }
}

fn check_eps(eps: i8) -> Result<()> {
    if eps == 1 || eps == -1 {
        Ok(())
    } else {
        Err(QoscError::DomainError(format!("eps must be +1 or -1, got {eps}")))
    }
}

/// `N_gamma = -2 H(gamma)`.
pub fn n_gamma(gc: &GammaContext, ctx: &QContext) -> Result<C> {
    Ok(-2.0 * theta_product(ThetaKind::H, gc.gamma, ctx)?)
}

/// `log(gamma^m q^{m^2/2})`.
fn spin_ln(m: i64, gc: &GammaContext, ctx: &QContext) -> C {
    ctx.ln_half_pow(m * m) + gc.gamma.ln() * m as f64
}

/// `q^{a^2/2} P_a(gamma q^m) / sqrt((q^2;q^2)_a)` for `a = 0..=a_max`.
fn normalized_p(m: i64, a_max: usize, gc: &GammaContext, ctx: &QContext) -> Vec<C> {
    p_normalized_sequence(gc.gamma * ctx.pow(m), a_max, ONE, ctx)
}

/// `<eps, a | mu, m>` for `a = 0..=a_max`.
pub fn ket_gamma(eps: i8, m: i64, a_max: usize, mu: C, gc: &GammaContext, ctx: &QContext) -> Result<Vec<C>> {
    check_eps(eps)?;
    let ng = n_gamma(gc, ctx)?;
    let base = spin_ln(m, gc, ctx);
    let lmu = mu.ln();
    Ok(normalized_p(m, a_max, gc, ctx)
        .into_iter()
        .enumerate()
        .map(|(a, r)| times_exp(r, base + lmu * a as f64) * eps_pow(eps, a as i64 + m) / ng)
        .collect())
}

/// `<mu, m | eps, a>` for `a = 0..=a_max`.
pub fn bra_gamma(m: i64, eps: i8, a_max: usize, mu: C, gc: &GammaContext, ctx: &QContext) -> Result<Vec<C>> {
    check_eps(eps)?;
    let base = spin_ln(m, gc, ctx);
    let shift = ctx.ln_pow(1) - mu.ln();
    Ok(normalized_p(m, a_max, gc, ctx)
        .into_iter()
        .enumerate()
        .map(|(a, r)| times_exp(r, base + shift * a as f64) * parity(a as i64 + m) * eps_pow(eps, a as i64 + m))
        .collect())
}

/// Overlap matrices of both parity sectors on `a <= a_max`, `|m| <= window`.
#[derive(Debug, Clone)]
pub struct VGammaMatrices {
    /// Spins `-window..=window`.
    pub spins: Vec<i64>,
    /// `ket[s][k][a] = <eps, a | mu, spins[k]>`, with `s = 0` for `eps = +1`.
    pub ket: [Vec<Vec<C>>; 2],
    /// `bra[s][k][a] = <mu, spins[k] | eps, a>`.
    pub bra: [Vec<Vec<C>>; 2],
    pub n_gamma: C,
}

const EPS: [i8; 2] = [1, -1];

pub fn vgamma_decomposition(gc: &GammaContext, mu: C, a_max: usize, ctx: &QContext) -> Result<VGammaMatrices> {
    let w = gc.window as i64;
    let spins: Vec<i64> = (-w..=w).collect();
    let build = |ket: bool, eps: i8| -> Result<Vec<Vec<C>>> {
        spins
            .iter()
            .map(|&m| if ket { ket_gamma(eps, m, a_max, mu, gc, ctx) } else { bra_gamma(m, eps, a_max, mu, gc, ctx) })
            .collect()
    };
    Ok(VGammaMatrices {
        ket: [build(true, 1)?, build(true, -1)?],
        bra: [build(false, 1)?, build(false, -1)?],
        spins,
        n_gamma: n_gamma(gc, ctx)?,
    })
}

/// Spins `|m| <= COMPLETENESS_SPINS` used for the occupation-sum side of completeness.
const COMPLETENESS_SPINS: i64 = 4;

/// Both lines of the completeness relation: the occupation sum gives
/// `delta / [gamma q^m]`, the spin sum gives `delta delta`.
pub fn completeness_gamma_check(gc: &GammaContext, mu: C, a_max: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let ms = COMPLETENESS_SPINS.min(gc.window as i64);
    let kets: Vec<[Vec<C>; 2]> = (-ms..=ms)
        .map(|m| Ok([ket_gamma(1, m, OCCUPATION_CAP, mu, gc, ctx)?, ket_gamma(-1, m, OCCUPATION_CAP, mu, gc, ctx)?]))
        .collect::<Result<_>>()?;
    let bras: Vec<[Vec<C>; 2]> = (-ms..=ms)
        .map(|m| Ok([bra_gamma(m, 1, OCCUPATION_CAP, mu, gc, ctx)?, bra_gamma(m, -1, OCCUPATION_CAP, mu, gc, ctx)?]))
        .collect::<Result<_>>()?;
    for (i, m) in (-ms..=ms).enumerate() {
        for j in 0..kets.len() {
            let s = ctx.sum_capped(OCCUPATION_CAP, |a| Ok(bras[i][0][a] * kets[j][0][a] + bras[i][1][a] * kets[j][1][a]))?;
            let target = if i == j { gc.measure(m, ctx).inv() } else { ZERO };
            worst = worst.max(rel_residual_scaled(s.value, target, s.abs_sum));
        }
    }
    let v = vgamma_decomposition(gc, mu, a_max, ctx)?;
    let offset = gc.window as i64;
    for (s1, s2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        for a in 0..=a_max {
            for b in 0..=a_max {
                let s = ctx.sum_bilateral_capped(gc.window, |m| {
                    let k = (m + offset) as usize;
                    Ok(v.ket[s1][k][a] * gc.measure(m, ctx) * v.bra[s2][k][b])
                })?;
                let target = if s1 == s2 && a == b { ONE } else { ZERO };
                worst = worst.max(rel_residual_scaled(s.value, target, s.abs_sum));
            }
        }
    }
    Ok(IdentityReport::check(
        "vgamma.completeness.5_8",
        params![("q", ctx.q()), ("gamma", gc.label()), ("mu", mu), ("A_max", a_max), ("M", gc.window)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// At `gamma = q^{1/2}`: `<+,a|m> + <+,a|-1-m>` reproduces the old Fock
/// overlap and the `eps = -1` combination vanishes.
pub fn old_state_check(a_max: usize, m_max: usize, mu: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let gc = GammaContext::generic(ctx.sqrt_q(), m_max + 1, ctx)?;
    let nf = nf(ctx)?;
    let mut worst = 0.0f64;
    for m in 0..=m_max as i64 {
        let old: Vec<C> = chi_column(m, a_max, ctx).iter().enumerate().map(|(a, c)| c * mu.powi(a as i32) / nf).collect();
        for eps in EPS {
            let k1 = ket_gamma(eps, m, a_max, mu, &gc, ctx)?;
            let k2 = ket_gamma(eps, -1 - m, a_max, mu, &gc, ctx)?;
            for a in 0..=a_max {
                let sum = k1[a] + k2[a];
                worst = worst.max(if eps > 0 {
                    rel_residual(sum, old[a])
                } else {
                    sum.norm() / (k1[a].norm() + k2[a].norm()).max(1e-300)
                });
            }
        }
    }
    Ok(IdentityReport::check(
        "vgamma.old_state.5_9",
        params![("q", ctx.q()), ("mu", mu), ("A_max", a_max), ("M", m_max)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// `K_0 |eps, a> = eps q^{a+1/2} |eps, a>`, read off the bra overlaps:
/// `<m-1|eps,a> - <m+1|eps,a> = eps q^{a+1/2} [gamma q^m] <m|eps,a>`.
pub fn parity_check(gc: &GammaContext, a_max: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let w = gc.window.min(8) as i64;
    let mut worst = 0.0f64;
    for eps in EPS {
        let rows: Vec<Vec<C>> = (-w - 1..=w + 1).map(|m| bra_gamma(m, eps, a_max, ONE, gc, ctx)).collect::<Result<_>>()?;
        for m in -w..=w {
            let k = (m + w + 1) as usize;
            for a in 0..=a_max {
                let lhs = rows[k - 1][a] - rows[k + 1][a];
                let rhs = ctx.half_pow(2 * a as i64 + 1) * gc.measure(m, ctx) * rows[k][a] * eps as f64;
                worst = worst.max(rel_residual_scaled(lhs, rhs, rows[k - 1][a].norm() + rows[k + 1][a].norm()));
            }
        }
    }
    Ok(IdentityReport::check(
        "vgamma.parity.5_7",
        params![("q", ctx.q()), ("gamma", gc.label()), ("A_max", a_max)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// Closed form of the sector weight `V^(eps)_x(m, m')`.
pub fn weight_veps(x: C, eps: i8, m: i64, mp: i64, gc: &GammaContext, ctx: &QContext) -> Result<C> {
    check_eps(eps)?;
    if x == ZERO {
        return Err(QoscError::DomainError("x must be nonzero".into()));
    }
    let y = x.inv();
    let g2 = gc.gamma * gc.gamma;
    let num = ctx.mono_poch_inf(y * g2, 2 + m + mp, 2)?
        * ctx.mono_poch_inf(y / g2, 2 - m - mp, 2)?
        * ctx.mono_poch_inf(y, 2 + m - mp, 2)?
        * ctx.mono_poch_inf(y, 2 - m + mp, 2)?;
    let pre = LogVal::from_ln(spin_ln(m, gc, ctx) + spin_ln(mp, gc, ctx));
    let v = (num * pre / ctx.mono_poch_inf(y * y, 2, 2)?).to_c()?;
    Ok(v * parity(m) * eps_pow(eps, m) * eps_pow(eps, mp) / n_gamma(gc, ctx)?)
}

/// `V^(eps)_x(m, m')` from its defining sum over occupations.
pub fn weight_veps_sum(x: C, eps: i8, m: i64, mp: i64, gc: &GammaContext, ctx: &QContext) -> Result<C> {
    let bra = bra_gamma(m, eps, OCCUPATION_CAP, ONE, gc, ctx)?;
    let ket = ket_gamma(eps, mp, OCCUPATION_CAP, x.inv(), gc, ctx)?;
    Ok(ctx.sum_capped(OCCUPATION_CAP, |a| Ok(bra[a] * ket[a]))?.value)
}

/// Closed form against the defining occupation sum.
pub fn veps_check(x: C, eps: i8, m: i64, mp: i64, gc: &GammaContext, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let closed = weight_veps(x, eps, m, mp, gc, ctx)?;
    let summed = weight_veps_sum(x, eps, m, mp, gc, ctx)?;
    Ok(IdentityReport::check(
        "vgamma.veps.5_10_5_11",
        params![("q", ctx.q()), ("gamma", gc.label()), ("x", x), ("eps", eps as i64), ("m", m), ("m'", mp)],
        rel_residual(closed, summed),
        ctx.tol(),
    )
    .timed(start))
}

/// `sum_{m'} V^(e)_x(m, m') [gamma q^{m'}] V^(e')_y(m', m'') = delta_{e e'} V^(e)_{xy}(m, m'')`
/// for all four sector pairs.
pub fn veps_orthogonality_check(x: C, y: C, m: i64, mpp: i64, gc: &GammaContext, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for e1 in EPS {
        for e2 in EPS {
            let s = ctx.sum_bilateral_capped(gc.window, |k| {
                Ok(weight_veps(x, e1, m, k, gc, ctx)? * gc.measure(k, ctx) * weight_veps(y, e2, k, mpp, gc, ctx)?)
            })?;
            let target = if e1 == e2 { weight_veps(x * y, e1, m, mpp, gc, ctx)? } else { ZERO };
            worst = worst.max(rel_residual_scaled(s.value, target, s.abs_sum));
        }
    }
    Ok(IdentityReport::check(
        "vgamma.orthogonality.5_12",
        params![("q", ctx.q()), ("gamma", gc.label()), ("x", x), ("y", y), ("m", m), ("m''", mpp)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// `P^(eps)_{m,m'} = [gamma q^m] V^(eps)_1(m, m')`.
pub fn projector(eps: i8, m: i64, mp: i64, gc: &GammaContext, ctx: &QContext) -> Result<C> {
    Ok(gc.measure(m, ctx) * weight_veps(ONE, eps, m, mp, gc, ctx)?)
}

/// Projector algebra on `|m|, |m'| <= inner`, with the internal spin sum over the whole window.
pub fn projector_check(gc: &GammaContext, inner: usize, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let w = gc.window as i64;
    let table = |eps: i8| -> Result<Vec<Vec<C>>> {
        (-w..=w).map(|m| (-w..=w).map(|mp| projector(eps, m, mp, gc, ctx)).collect()).collect()
    };
    let p = [table(1)?, table(-1)?];
    let idx = |m: i64| (m + w) as usize;
    let inner = inner.min(gc.window) as i64;
    let mut worst = 0.0f64;
    for m in -inner..=inner {
        for mp in -inner..=inner {
            let delta = if m == mp { ONE } else { ZERO };
            worst = worst.max(rel_residual_scaled(p[0][idx(m)][idx(mp)] + p[1][idx(m)][idx(mp)], delta, 1.0));
            for s1 in 0..2 {
                for s2 in 0..2 {
                    let mut sum = ZERO;
                    let mut abs = 0.0;
                    for k in 0..p[0].len() {
                        let t = p[s1][idx(m)][k] * p[s2][k][idx(mp)];
                        sum += t;
                        abs += t.norm();
                    }
                    let target = if s1 == s2 { p[s1][idx(m)][idx(mp)] } else { ZERO };
                    worst = worst.max(rel_residual_scaled(sum, target, abs.max(1.0)));
                }
            }
        }
    }
    Ok(IdentityReport::check(
        "vgamma.projectors.5_13",
        params![("q", ctx.q()), ("gamma", gc.label()), ("M", gc.window), ("inner", inner)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// `V^(+)_x(m, m') + V^(-)_x(m, m') = 0` whenever `m + m'` is odd, on `[-box, box]^2`.
pub fn parity_vanishing_check(x: C, spin_box: i64, gc: &GammaContext, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for m in -spin_box..=spin_box {
        for mp in -spin_box..=spin_box {
            if (m + mp).rem_euclid(2) == 1 {
                let a = weight_veps(x, 1, m, mp, gc, ctx)?;
                let b = weight_veps(x, -1, m, mp, gc, ctx)?;
                worst = worst.max((a + b).norm() / (a.norm() + b.norm()).max(1e-300));
            }
        }
    }
    Ok(IdentityReport::check(
        "vgamma.parity_vanishing.5_19",
        params![("q", ctx.q()), ("gamma", gc.label()), ("x", x), ("box", spin_box)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// `M_gamma` as the spin sum and as `-H(gamma) theta_3(gamma) / (q^2;q^2)_inf`.
pub fn m_gamma(gc: &GammaContext, ctx: &QContext) -> Result<(C, C)> {
    let g = gc.gamma;
    let s = ctx.sum_bilateral_capped(gc.window, |m| {
        Ok(times_exp(gc.measure(m, ctx), ctx.ln_half_pow(3 * m * m) + g.ln() * (3 * m) as f64) * parity(m))
    })?;
    let closed = -theta_product(ThetaKind::H, g, ctx)? * theta_product(ThetaKind::Theta3, g, ctx)?
        / qpoch_inf(ctx.q2(), ctx.q2(), ctx)?;
    Ok((s.value, closed))
}

/// The brace `{a, b, c}` from the spin sum over `Z` at `gamma`.
pub fn brace_gamma(a: usize, b: usize, c: usize, gc: &GammaContext, ctx: &QContext) -> Result<C> {
    let top = a.max(b).max(c);
    let g = gc.gamma;
    let s = ctx.sum_bilateral_capped(gc.window, |m| {
        let p = crate::orthopoly::p_scaled_sequence(g * ctx.pow(m), top, ONE, ctx);
        let core = gc.measure(m, ctx) * p[a] * p[b] * p[c];
        Ok(times_exp(core, ctx.ln_half_pow(3 * m * m) + g.ln() * (3 * m) as f64) * parity(m))
    })?;
    let (mg, _) = m_gamma(gc, ctx)?;
    Ok(s.value / mg)
}

/// Largest index accepted by [`brace_gamma_check`].
pub const BRACE_GAMMA_MAX: usize = 8;

/// `{a,b,c}` from the `gamma` spin sum equals the closed form for every
/// `gamma` given, and `M_gamma` matches its theta-product form.
pub fn brace_gamma_check(a: usize, b: usize, c: usize, gammas: &[GammaContext], ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    if a.max(b).max(c) > BRACE_GAMMA_MAX {
        return Err(QoscError::DomainError(format!("brace indices must not exceed {BRACE_GAMMA_MAX}")));
    }
    let closed = brace(a, b, c, BraceMethod::ClosedForm, ctx)?;
    let mut worst = 0.0f64;
    for gc in gammas {
        let (sum, prod) = m_gamma(gc, ctx)?;
        worst = worst.max(rel_residual(sum, prod));
        worst = worst.max(rel_residual(brace_gamma(a, b, c, gc, ctx)?, closed));
    }
    let labels: Vec<String> = gammas.iter().map(|g| g.label()).collect();
    Ok(IdentityReport::check(
        "vgamma.brace.5_14_5_15",
        params![("q", ctx.q()), ("a", a), ("b", b), ("c", c), ("gammas", labels.join(";"))],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// Relative size below which a Pochhammer factor counts as an exact lattice zero.
const LATTICE_ZERO: f64 = 1e-14;

/// `log((u; q^2)_n / (v; q^2)_n)` for `n in Z`, with
/// `(x; q^2)_{-n} = 1/(x q^{-2n}; q^2)_n`; `None` when the numerator has a
/// lattice zero.
fn ln_poch_ratio(u: C, v: C, n: i64, ctx: &QContext) -> Result<Option<C>> {
    let (mut ln, mut num_zero) = (ZERO, false);
    let mut den_zero = false;
    let is_zero = |z: C| (ONE - z).norm() <= LATTICE_ZERO * z.norm().max(1.0);
    let terms: Vec<(C, C)> = if n >= 0 {
        (0..n).map(|k| (u * ctx.pow(2 * k), v * ctx.pow(2 * k))).collect()
    } else {
        (1..=-n).map(|j| (v * ctx.pow(-2 * j), u * ctx.pow(-2 * j))).collect()
    };
    for (a, b) in terms {
        if is_zero(a) {
            num_zero = true;
        } else {
            ln += (ONE - a).ln();
        }
        if is_zero(b) {
            den_zero = true;
        } else {
            ln -= (ONE - b).ln();
        }
    }
    if den_zero {
        return Err(QoscError::PoleHit(format!("Pochhammer ratio ({u}; q^2)_{n} / ({v}; q^2)_{n} has a vanishing denominator")));
    }
    Ok(if num_zero { None } else { Some(ln) })
}

/// The rational Kashiwara-Miwa weights at one `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMWeightSet {
    pub gc: GammaContext,
}

impl KMWeightSet {
    pub fn new(gc: GammaContext) -> Self {
        Self { gc }
    }

    /// `V_x(m, m') = (q/x)^{2m} (x;q^2)_{m-m'}/(q^2/x;q^2)_{m-m'} (gamma^2 x;q^2)_{m+m'}/(gamma^2 q^2/x;q^2)_{m+m'}`.
    pub fn v_bold(&self, x: C, m: i64, mp: i64, ctx: &QContext) -> Result<C> {
        if x == ZERO {
            return Err(QoscError::DomainError("x must be nonzero".into()));
        }
        let q = ctx.q();
        // q^2/x is formed as q (q/x) so that x = q gives exactly 1
        let y = q / x;
        let g2 = self.gc.gamma * self.gc.gamma;
        let edge = ln_poch_ratio(x, q * y, m - mp, ctx)?;
        let diag = ln_poch_ratio(g2 * x, g2 * (q * y), m + mp, ctx)?;
        Ok(match (edge, diag) {
            (Some(e), Some(d)) if y == ONE && e == ZERO && d == ZERO => ONE,
            (Some(e), Some(d)) => (y.ln() * (2 * m) as f64 + e + d).exp(),
            _ => ZERO,
        })
    }

    /// `Vbar_x(a, b) = V_{q/x}(a, b)`.
    pub fn v_bar(&self, x: C, a: i64, b: i64, ctx: &QContext) -> Result<C> {
        self.v_bold(ctx.q() / x, a, b, ctx)
    }

    /// `S_m = [gamma q^{2m}] / [gamma]`.
    pub fn s_bold(&self, m: i64, ctx: &QContext) -> C {
        self.gc.measure(2 * m, ctx) / self.gc.measure(0, ctx)
    }

    /// `Phi(x)` as the product
    /// `(q^2, q^2/x^2, q^2 gamma^2, q^2/gamma^2; q^2) / (q^2/x, q^2/x, q^2 gamma^2/x, q^2/(gamma^2 x); q^2)`.
    pub fn phi(&self, x: C, ctx: &QContext) -> Result<C> {
        let p = ctx.q2();
        let g2 = self.gc.gamma * self.gc.gamma;
        let num = qpoch_inf_multi(&[p, p / (x * x), p * g2, p / g2], p, ctx)?;
        let den = qpoch_inf_multi(&[p / x, p / x, p * g2 / x, p / (g2 * x)], p, ctx)?;
        Ok(num / den)
    }

    /// `Phi(x) = 1 / (2 [gamma] V^(+)_x(0, 0))`.
    pub fn phi_from_definition(&self, x: C, ctx: &QContext) -> Result<C> {
        Ok((2.0 * self.gc.measure(0, ctx) * weight_veps(x, 1, 0, 0, &self.gc, ctx)?).inv())
    }

    fn selected_nu(&self) -> Result<i32> {
        match self.gc.two_nu {
            Some(t @ (-1..=1)) => Ok(t),
            _ => Err(QoscError::UnsupportedGamma(format!(
                "kappa and z are tabulated for gamma = i and i q^(+-1/2), got {}",
                self.gc.label()
            ))),
        }
    }

    /// `kappa(x)` for `gamma = i` and `gamma = i q^{+-1/2}`.
    pub fn kappa(&self, x: C, ctx: &QContext) -> Result<C> {
        let q = ctx.q();
        let p = ctx.q2();
        if self.selected_nu()? == 0 {
            let p2 = p * p;
            Ok(qpoch_inf(p * x * x, p2, ctx)? / qpoch_inf(p2 / (x * x), p2, ctx)?)
        } else {
            Ok(qpoch_inf_multi(&[q * x, -p * x], p, ctx)? / qpoch_inf_multi(&[p / x, -q * p / x], p, ctx)?)
        }
    }

    /// `log z(x)`, the free energy per edge weight.
    pub fn log_z(&self, x: C, ctx: &QContext) -> Result<C> {
        let nu = self.selected_nu()?;
        let q = ctx.q();
        let dual = q * q / x;
        let (mut xn, mut dn) = (ONE, ONE);
        let s = ctx.sum_series_min(2, |n| {
            if n == 0 {
                return ZERO;
            }
            let k = n as i64;
            let nf = n as f64;
            if nu == 0 {
                xn *= x * x;
                dn *= dual * dual;
                -ctx.pow(2 * k) * (xn - ctx.pow(4 * k) / xn) / (nf * (ONE - ctx.pow(4 * k)) * (ONE + ctx.pow(2 * k)))
            } else {
                xn *= x;
                dn *= dual;
                let c = ctx.pow(k) + ctx.pow(2 * k) * parity(k);
                -c * (xn - dn) / (nf * (ONE - ctx.pow(2 * k)) * (ONE + ctx.pow(k)))
            }
        })?;
        Ok(s.value)
    }
}

/// Labels of the bold-weight reports.
fn km_params(w: &KMWeightSet, x: C, ctx: &QContext) -> crate::report::Params {
    params![("q", ctx.q()), ("gamma", w.gc.label()), ("x", x)]
}

/// The bold weight against its definition as a ratio of sector weights,
/// and `Phi` in product form against `1 / (2 [gamma] V^(+)_x(0,0))`.
pub fn bold_definition_check(w: &KMWeightSet, x: C, spin_box: i64, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let v00 = weight_veps(x, 1, 0, 0, &w.gc, ctx)?;
    let mut worst = rel_residual(w.phi(x, ctx)?, w.phi_from_definition(x, ctx)?);
    for m in -spin_box..=spin_box {
        for mp in -spin_box..=spin_box {
            let direct = weight_veps(x, 1, 2 * m, 2 * mp, &w.gc, ctx)? / v00;
            worst = worst.max(rel_residual(w.v_bold(x, m, mp, ctx)?, direct));
        }
    }
    Ok(IdentityReport::check("vgamma.bold_definition.5_20_5_22", km_params(w, x, ctx), worst, ctx.tol()).timed(start))
}

/// Symmetry, `V_1 = delta / S`, `V_x V_{q^2/x} = 1` and `V_q = 1` on `[-box, box]^2`.
pub fn bold_symmetry_check(w: &KMWeightSet, x: C, spin_box: i64, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let q = ctx.q();
    let mut worst = 0.0f64;
    for a in -spin_box..=spin_box {
        for b in -spin_box..=spin_box {
            let v = w.v_bold(x, a, b, ctx)?;
            worst = worst.max(rel_residual(v, w.v_bold(x, b, a, ctx)?));
            worst = worst.max((v * w.v_bold(q * (q / x), a, b, ctx)? - ONE).norm());
            worst = worst.max((w.v_bold(q, a, b, ctx)? - ONE).norm());
            let unit = w.v_bold(ONE, a, b, ctx)?;
            let target = if a == b { w.s_bold(a, ctx).inv() } else { ZERO };
            worst = worst.max(rel_residual_scaled(unit, target, 1e-300));
        }
    }
    Ok(IdentityReport::check(
        "vgamma.symmetry.5_24",
        params![("q", ctx.q()), ("gamma", w.gc.label()), ("x", x), ("box", spin_box)],
        worst,
        ctx.tol(),
    )
    .timed(start))
}

/// `sum_b V_x(a,b) S_b V_y(b,c) = Phi(x) Phi(y) / Phi(xy) V_{xy}(a,c)`;
/// with `y = 1/x` this is the inversion relation.
pub fn bold_summation_check(w: &KMWeightSet, x: C, y: C, a: i64, c: i64, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let s = ctx.sum_bilateral_capped(w.gc.window, |b| {
        Ok(w.v_bold(x, a, b, ctx)? * w.s_bold(b, ctx) * w.v_bold(y, b, c, ctx)?)
    })?;
    let xy = x * y;
    let inversion = (xy - ONE).norm() < 1e-15;
    let target = if inversion {
        let d = if a == c { w.s_bold(a, ctx).inv() } else { ZERO };
        w.phi(x, ctx)? * w.phi(y, ctx)? * d
    } else {
        w.phi(x, ctx)? * w.phi(y, ctx)? / w.phi(xy, ctx)? * w.v_bold(xy, a, c, ctx)?
    };
    let id = if inversion { "vgamma.inversion.5_26" } else { "vgamma.summation.5_25" };
    let mut p = km_params(w, x, ctx);
    p.extend(params![("y", y), ("a", a), ("c", c)]);
    Ok(IdentityReport::check(id, p, rel_residual_scaled(s.value, target, s.abs_sum), ctx.tol()).timed(start))
}

/// Both sides of the star-triangle relation at `z = q / (xy)`, without the
/// `kappa` prefactor: `(star sum, triangle product, sum of |terms|)`.
pub fn star_triangle_km_sides(w: &KMWeightSet, x: C, y: C, spins: (i64, i64, i64), ctx: &QContext) -> Result<(C, C, f64)> {
    let q = ctx.q();
    let z = q / (x * y);
    let (a, b, c) = spins;
    let s = ctx.sum_bilateral_capped(w.gc.window, |d| {
        Ok(w.s_bold(d, ctx) * w.v_bold(x, a, d, ctx)? * w.v_bold(y, b, d, ctx)? * w.v_bold(z, c, d, ctx)?)
    })?;
    let tri = w.v_bar(x, b, c, ctx)? * w.v_bar(y, a, c, ctx)? * w.v_bar(z, a, b, ctx)?;
    Ok((s.value, tri, s.abs_sum))
}

/// The star-triangle relation. At selected `gamma` the prefactor is
/// `kappa(x) kappa(y) kappa(z) / kappa(1)` and the report must pass. At
/// generic `gamma` there is no tabulated `kappa`: the prefactor is fitted at
/// the first spin triple and the spread over the others is reported as a
/// negative control.
pub fn star_triangle_km(w: &KMWeightSet, x: C, y: C, spins: &[(i64, i64, i64)], ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    if spins.is_empty() {
        return Err(QoscError::DomainError("no spin triples given".into()));
    }
    let sides = spins.iter().map(|&s| star_triangle_km_sides(w, x, y, s, ctx)).collect::<Result<Vec<_>>>()?;
    let selected = w.gc.is_selected() && w.selected_nu().is_ok();
    let prefactor = if selected {
        let z = ctx.q() / (x * y);
        w.kappa(x, ctx)? * w.kappa(y, ctx)? * w.kappa(z, ctx)? / w.kappa(ONE, ctx)?
    } else {
        sides[0].0 / sides[0].1
    };
    let residual = sides.iter().map(|&(l, t, s)| rel_residual_scaled(l, prefactor * t, s)).fold(0.0, f64::max);
    let mut p = km_params(w, x, ctx);
    let list: Vec<String> = spins.iter().map(|(a, b, c)| format!("({a},{b},{c})")).collect();
    p.extend(params![("y", y), ("spins", list.join(";"))]);
    let report = if selected {
        IdentityReport::check("vgamma.star_triangle.5_27", p, residual, ctx.tol())
    } else {
        IdentityReport::negative_control("vgamma.star_triangle.5_27", p, residual, ctx.tol())
    };
    Ok(report.timed(start))
}

/// `kappa(x, q^{1/2} gamma) / kappa(x, gamma)` against
/// `(q^2 gamma^2 x, q^2/(gamma^2 x); q^2) / (q x/gamma^2, q^3 gamma^2/x; q^2)` at `gamma = i`.
pub fn kappa_ratio_check(x: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let lo = KMWeightSet::new(GammaContext::selected(0, 0, ctx)?);
    let hi = KMWeightSet::new(GammaContext::selected(1, 0, ctx)?);
    let g2 = -ONE;
    let p = ctx.q2();
    let q = ctx.q();
    let closed = qpoch_inf_multi(&[p * g2 * x, p / (g2 * x)], p, ctx)? / qpoch_inf_multi(&[q * x / g2, q * p * g2 / x], p, ctx)?;
    let ratio = hi.kappa(x, ctx)? / lo.kappa(x, ctx)?;
    Ok(IdentityReport::check(
        "vgamma.kappa_ratio.5_28",
        params![("q", q), ("x", x)],
        rel_residual(ratio, closed),
        ctx.tol(),
    )
    .timed(start))
}

/// `z(x) z(q^2/x) = 1` and `z(x)/z(q/x) = kappa(x)` with the series for
/// `log z`; for `gamma = i q^{-1/2}` also the ratio recursion from `gamma`
/// to `q gamma`, whose right side is exactly one there.
pub fn km_partition_check(w: &KMWeightSet, x: C, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let q = ctx.q();
    let lz = w.log_z(x, ctx)?;
    let first = (lz + w.log_z(q * (q / x), ctx)?).exp();
    let second = (lz - w.log_z(q / x, ctx)?).exp();
    let mut worst = (first - ONE).norm().max(rel_residual(second, w.kappa(x, ctx)?));
    if w.gc.two_nu == Some(-1) {
        let g2 = w.gc.gamma * w.gc.gamma;
        let p = ctx.q2();
        let rhs = qpoch_inf_multi(&[p / (g2 * x), p * g2 * x], p, ctx)? / qpoch_inf_multi(&[x / g2, p * p * g2 / x], p, ctx)?;
        let up = KMWeightSet::new(GammaContext::selected(1, w.gc.window, ctx)?);
        let lhs = (up.log_z(x, ctx)? - lz).exp();
        worst = worst.max(rel_residual(lhs, rhs));
    }
    Ok(IdentityReport::check("vgamma.functional.5_29_5_30", km_params(w, x, ctx), worst, ctx.tol()).timed(start))
}

/// `z_s = 1/kappa(1) = kappa(q)`.
pub fn central_spin_check(w: &KMWeightSet, ctx: &QContext) -> Result<IdentityReport> {
    let start = Instant::now();
    let residual = (w.kappa(ONE, ctx)? * w.kappa(ctx.q(), ctx)? - ONE).norm();
    Ok(IdentityReport::check(
        "vgamma.central_spin.5_31",
        params![("q", ctx.q()), ("gamma", w.gc.label())],
        residual,
        ctx.tol(),
    )
    .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> QContext {
        QContext::real(0.4).unwrap()
    }

    fn generic(ctx: &QContext) -> GammaContext {
        GammaContext::generic(C::from_polar(0.7, 0.4), 120, ctx).unwrap()
    }

    #[test]
    fn singular_measure_rejected() {
        let ctx = ctx();
        let err = GammaContext::generic(ctx.pow(-3), 5, &ctx).unwrap_err();
        assert!(matches!(err, QoscError::SingularMeasure { m: 3, .. }));
    }

    #[test]
    fn completeness_and_parity() {
        let ctx = ctx();
        let gc = generic(&ctx);
        let r = completeness_gamma_check(&gc, C::new(1.1, 0.1), 12, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = parity_check(&gc, 6, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = old_state_check(6, 6, C::new(0.9, 0.2), &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
    }

    #[test]
    fn sector_weights() {
        let ctx = ctx();
        for gc in [generic(&ctx), GammaContext::selected(0, 120, &ctx).unwrap(), GammaContext::selected(1, 120, &ctx).unwrap()] {
            for (m, mp) in [(0, 0), (1, -2), (2, 3)] {
                for eps in EPS {
                    let r = veps_check(C::from_polar(1.2, 0.3), eps, m, mp, &gc, &ctx).unwrap();
                    assert!(r.passed(), "{:?} {}", gc, r.residual);
                }
            }
            let r = veps_orthogonality_check(C::new(0.9, 0.0), C::new(0.8, 0.0), 0, 1, &gc, &ctx).unwrap();
            assert!(r.passed(), "{}", r.residual);
            let r = parity_vanishing_check(C::new(0.8, 0.0), 4, &gc, &ctx).unwrap();
            assert!(r.passed(), "{}", r.residual);
        }
    }

    #[test]
    fn projectors() {
        let ctx = ctx();
        let r = projector_check(&generic(&ctx), 3, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
    }

    #[test]
    fn braces_are_gamma_independent() {
        let ctx = ctx();
        let gs = [
            GammaContext::generic(C::new(0.6, 0.0), 40, &ctx).unwrap(),
            GammaContext::generic(C::from_polar(0.9, 0.2), 40, &ctx).unwrap(),
        ];
        assert!((brace_gamma(0, 0, 0, &gs[1], &ctx).unwrap() - ONE).norm() < 1e-12);
        for (a, b, c) in [(2, 1, 1), (3, 2, 2), (0, 1, 1)] {
            let r = brace_gamma_check(a, b, c, &gs, &ctx).unwrap();
            assert!(r.passed(), "{a}{b}{c} {}", r.residual);
        }
    }

    #[test]
    fn bold_weights_exact_points() {
        let ctx = ctx();
        let w = KMWeightSet::new(generic(&ctx));
        assert_eq!(w.v_bold(ctx.q(), 3, -2, &ctx).unwrap(), ONE);
        assert_eq!(w.v_bold(ONE, 2, 1, &ctx).unwrap(), ZERO);
        assert_eq!(w.v_bold(ONE, 1, 2, &ctx).unwrap(), ZERO);
        let r = bold_symmetry_check(&w, C::new(0.7, 0.0), 5, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let r = bold_definition_check(&w, C::new(0.7, 0.0), 2, &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
    }

    #[test]
    fn summation_and_inversion() {
        let ctx = ctx();
        for gc in [GammaContext::selected(0, 120, &ctx).unwrap(), generic(&ctx)] {
            let w = KMWeightSet::new(gc);
            let r = bold_summation_check(&w, C::new(0.7, 0.0), C::new(0.8, 0.0), 1, -2, &ctx).unwrap();
            assert!(r.passed(), "{}", r.residual);
            let x = C::new(0.7, 0.0);
            let r = bold_summation_check(&w, x, x.inv(), 1, 1, &ctx).unwrap();
            assert_eq!(r.identity_id, "vgamma.inversion.5_26");
            assert!(r.passed(), "{}", r.residual);
        }
    }

    #[test]
    fn star_triangle_dichotomy() {
        let ctx = ctx();
        let (x, y) = (C::new(0.7, 0.0), C::new(0.6, 0.0));
        let spins = [(0, 0, 0), (1, -1, 2)];
        for two_nu in [0, 1, -1] {
            let w = KMWeightSet::new(GammaContext::selected(two_nu, 40, &ctx).unwrap());
            let r = star_triangle_km(&w, x, y, &spins, &ctx).unwrap();
            assert!(r.passed(), "nu2={two_nu} {}", r.residual);
        }
        let w = KMWeightSet::new(GammaContext::generic(C::from_polar(0.8, 0.3), 40, &ctx).unwrap());
        let r = star_triangle_km(&w, x, y, &spins, &ctx).unwrap();
        assert_eq!(r.verdict, crate::report::Verdict::ExpectedFail);
        assert!(r.residual > 1e-3);
    }

    #[test]
    fn functional_equations() {
        let ctx = ctx();
        for two_nu in [0, 1, -1] {
            let w = KMWeightSet::new(GammaContext::selected(two_nu, 40, &ctx).unwrap());
            for x in [0.6, 0.75] {
                let r = km_partition_check(&w, C::new(x, 0.0), &ctx).unwrap();
                assert!(r.residual < 1e-9, "{two_nu} {x} {}", r.residual);
            }
            let r = central_spin_check(&w, &ctx).unwrap();
            assert!(r.residual < 1e-10);
        }
        let r = kappa_ratio_check(C::new(0.6, 0.0), &ctx).unwrap();
        assert!(r.passed(), "{}", r.residual);
        let w = KMWeightSet::new(generic(&ctx));
        assert!(matches!(w.kappa(ONE, &ctx), Err(QoscError::UnsupportedGamma(_))));
    }
}
