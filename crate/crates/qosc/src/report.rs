//! Identity reports and residual conventions.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::context::C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "EXPECTED_FAIL")]
    ExpectedFail,
    #[serde(rename = "SKIPPED")]
    Skipped,
}

impl Verdict {
    /// Whether a run containing this verdict still succeeds.
    pub fn is_ok(self) -> bool {
        !matches!(self, Verdict::Fail)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::ExpectedFail => "EXPECTED_FAIL",
            Verdict::Skipped => "SKIPPED",
        })
    }
}

pub type Params = BTreeMap<String, String>;

/// One verified identity at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity_id: String,
    pub params: Params,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub wall_time_ms: f64,
}

impl IdentityReport {
    /// PASS iff `residual <= tolerance`.
    pub fn check(id: &str, params: Params, residual: f64, tolerance: f64) -> Self {
        let verdict = if residual <= tolerance { Verdict::Pass } else { Verdict::Fail };
        Self::with_verdict(id, params, residual, tolerance, verdict)
    }

    /// Negative control: EXPECTED_FAIL iff `residual > 10 * tolerance`.
    pub fn negative_control(id: &str, params: Params, residual: f64, tolerance: f64) -> Self {
        let verdict = if residual > 10.0 * tolerance { Verdict::ExpectedFail } else { Verdict::Fail };
        Self::with_verdict(id, params, residual, tolerance, verdict)
    }

    pub fn skipped(id: &str, params: Params, reason: &str) -> Self {
        let mut params = params;
        params.insert("skipped".into(), reason.into());
        Self::with_verdict(id, params, f64::NAN, 0.0, Verdict::Skipped)
    }

    fn with_verdict(id: &str, params: Params, residual: f64, tolerance: f64, verdict: Verdict) -> Self {
        Self { identity_id: id.to_string(), params, residual, tolerance, verdict, wall_time_ms: 0.0 }
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// `|a - b| / max(|a|, |b|, 1e-300)`.
pub fn rel_residual(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Relative residual with an explicit magnitude floor, used for identities
/// whose sides cancel (the floor is usually the sum of term moduli).
pub fn rel_residual_scaled(a: C, b: C, scale: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(scale).max(1e-300)
}

/// Formats a parameter value for report maps. Deterministic for equal input.
pub trait ParamValue {
    fn param(&self) -> String;
}

impl ParamValue for f64 {
    fn param(&self) -> String {
        format!("{self}")
    }
}

impl ParamValue for C {
    fn param(&self) -> String {
        if self.im == 0.0 {
            format!("{}", self.re)
        } else if self.re == 0.0 {
            format!("{}i", self.im)
        } else {
            format!("{}{:+}i", self.re, self.im)
        }
    }
}

macro_rules! int_param {
    ($($t:ty),*) => {$(
        impl ParamValue for $t {
            fn param(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
int_param!(i32, i64, usize, u64);

impl ParamValue for &str {
    fn param(&self) -> String {
        self.to_string()
    }
}

impl ParamValue for String {
    fn param(&self) -> String {
        self.clone()
    }
}

/// Builds a [`Params`] map: `params![("q", q), ("m", 3)]`.
#[macro_export]
macro_rules! params {
    ($(($k:expr, $v:expr)),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut p = $crate::report::Params::new();
        $( p.insert($k.to_string(), $crate::report::ParamValue::param(&$v)); )*
        p
    }};
}
