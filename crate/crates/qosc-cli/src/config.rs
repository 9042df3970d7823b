//! Run configuration: defaults, TOML file, flag overrides.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use qosc::C;
use serde::Deserialize;

use crate::CliError;

/// Output format of a report or table stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Format::from_str_ci(s)
    }
}

impl Format {
    fn from_str_ci(s: &str) -> Result<Self, CliError> {
        <Format as ValueEnum>::from_str(s, true).map_err(|_| CliError::Config(format!("unknown format {s:?}")))
    }
}

/// Parses `0.4`, `-0.3`, `2i`, `-i`, `0.8+0.3i`, `1e-3-2e-1i`.
pub fn parse_complex(s: &str) -> Result<C, CliError> {
    let bad = || CliError::Config(format!("cannot parse complex number {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| C::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not the leading one and not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(C::new(re, im))
}

/// The `gamma` parameter of the V_gamma model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSpec {
    Generic(C),
    /// Selected point `gamma = i q^nu`, stored as `2 nu`.
    Selected(i32),
}

impl FromStr for GammaSpec {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        if let Some(nu) = s.strip_prefix("selected:") {
            let two_nu = match nu.trim() {
                "0" => 0,
                "1/2" | "0.5" | "+1/2" => 1,
                "-1/2" | "-0.5" => -1,
                other => return Err(CliError::Config(format!("selected nu must be 0 or +-1/2, got {other:?}"))),
            };
            return Ok(GammaSpec::Selected(two_nu));
        }
        let value = s.strip_prefix("generic:").unwrap_or(s);
        parse_complex(value).map(GammaSpec::Generic)
    }
}

impl fmt::Display for GammaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaSpec::Generic(g) => write!(f, "generic:{}", qosc::report::ParamValue::param(g)),
            GammaSpec::Selected(0) => f.write_str("selected:0"),
            GammaSpec::Selected(n) => write!(f, "selected:{}/2", n),
        }
    }
}

/// Resolved settings of a `verify` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Nome; default 0.4.
    pub q: C,
    /// `None` runs each V_gamma identity at its standard gamma set.
    pub gamma: Option<GammaSpec>,
    /// Angle of `b = e^{i theta}`; default pi/5.
    pub theta: f64,
    /// Series tolerance override.
    pub tol: Option<f64>,
    /// Series term cap override.
    pub max_terms: Option<usize>,
    /// Globs over identity ids; a report runs if any matches. Default `*`.
    pub filters: Vec<String>,
    /// Seed of the randomised parameter points; default 0.
    pub seed: u64,
    pub format: Format,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: C::new(0.4, 0.0),
            gamma: None,
            theta: PI / 5.0,
            tol: None,
            max_terms: None,
            filters: vec!["*".into()],
            seed: 0,
            format: Format::Human,
            jobs: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    params: ParamsSection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSection {
    q: Option<String>,
    gamma: Option<String>,
    theta: Option<f64>,
    tol: Option<f64>,
    max_terms: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    filter: Option<String>,
    seed: Option<u64>,
    format: Option<String>,
    jobs: Option<usize>,
}

/// Flag values of `verify`; any `Some` overrides the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub filters: Vec<String>,
    pub q: Option<String>,
    pub gamma: Option<String>,
    pub theta: Option<f64>,
    pub tol: Option<f64>,
    pub max_terms: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// Applies a TOML document with `[params]` and `[run]` sections.
    pub fn merge_toml(mut self, text: &str) -> Result<Self, CliError> {
        let file: FileConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let p = file.params;
        if let Some(q) = p.q {
            self.q = parse_complex(&q)?;
        }
        if let Some(g) = p.gamma {
            self.gamma = Some(g.parse()?);
        }
        self.theta = p.theta.unwrap_or(self.theta);
        self.tol = p.tol.or(self.tol);
        self.max_terms = p.max_terms.or(self.max_terms);
        let r = file.run;
        if let Some(f) = r.filter {
            self.filters = vec![f];
        }
        self.seed = r.seed.unwrap_or(self.seed);
        if let Some(f) = r.format {
            self.format = f.parse()?;
        }
        self.jobs = r.jobs.or(self.jobs);
        Ok(self)
    }

    pub fn merge_file(self, path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.merge_toml(&text)
    }

    pub fn apply(mut self, o: Overrides) -> Result<Self, CliError> {
        if !o.filters.is_empty() {
            self.filters = o.filters;
        }
        if let Some(q) = o.q {
            self.q = parse_complex(&q)?;
        }
        if let Some(g) = o.gamma {
            self.gamma = Some(g.parse()?);
        }
        self.theta = o.theta.unwrap_or(self.theta);
        self.tol = o.tol.or(self.tol);
        self.max_terms = o.max_terms.or(self.max_terms);
        self.seed = o.seed.unwrap_or(self.seed);
        self.format = o.format.unwrap_or(self.format);
        self.jobs = o.jobs.or(self.jobs);
        self.validate()
    }

    fn validate(self) -> Result<Self, CliError> {
        if self.q.norm() >= 1.0 || self.q.norm() == 0.0 || !self.q.norm().is_finite() {
            return Err(CliError::Config(format!("nome must satisfy 0 < |q| < 1, got {}", self.q)));
        }
        if !(self.theta > 0.0 && self.theta < PI / 2.0) {
            return Err(CliError::Config(format!("theta must lie in (0, pi/2), got {}", self.theta)));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Config(format!("tolerance must lie in (0, 1), got {t}")));
            }
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs must be positive".into()));
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let cases = [
            ("0.4", C::new(0.4, 0.0)),
            ("-0.3", C::new(-0.3, 0.0)),
            ("2i", C::new(0.0, 2.0)),
            ("-i", C::new(0.0, -1.0)),
            ("0.8+0.3i", C::new(0.8, 0.3)),
            ("0.8 - 0.3i", C::new(0.8, -0.3)),
            ("1e-3-2e-1i", C::new(1e-3, -0.2)),
            ("-1e+2+i", C::new(-100.0, 1.0)),
        ];
        for (s, want) in cases {
            assert_eq!(parse_complex(s).unwrap(), want, "{s}");
        }
        for s in ["", "i0", "abc", "0.3+0.2j"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn gamma_specs() {
        assert_eq!("selected:1/2".parse::<GammaSpec>().unwrap(), GammaSpec::Selected(1));
        assert_eq!("selected:-0.5".parse::<GammaSpec>().unwrap(), GammaSpec::Selected(-1));
        assert_eq!("generic:0.8+0.3i".parse::<GammaSpec>().unwrap(), GammaSpec::Generic(C::new(0.8, 0.3)));
        assert_eq!("0.5i".parse::<GammaSpec>().unwrap(), GammaSpec::Generic(C::new(0.0, 0.5)));
        assert!("selected:1".parse::<GammaSpec>().is_err());
        assert_eq!(GammaSpec::Selected(-1).to_string(), "selected:-1/2");
    }

    #[test]
    fn flags_override_file() {
        let file = "[params]\nq = \"0.3\"\ntheta = 0.5\n[run]\nseed = 9\nformat = \"json\"\nfilter = \"fock.*\"\n";
        let cfg = RunConfig::default().merge_toml(file).unwrap();
        assert_eq!(cfg.q, C::new(0.3, 0.0));
        assert_eq!(cfg.format, Format::Json);
        let cfg = cfg
            .apply(Overrides { seed: Some(4), q: Some("-0.2".into()), ..Overrides::default() })
            .unwrap();
        assert_eq!((cfg.seed, cfg.q, cfg.theta), (4, C::new(-0.2, 0.0), 0.5));
        assert_eq!(cfg.filters, vec!["fock.*".to_string()]);
    }

    #[test]
    fn bad_config_is_rejected() {
        assert!(RunConfig::default().merge_toml("[params]\nbogus = 1\n").is_err());
        assert!(RunConfig::default().merge_toml("not toml").is_err());
        let o = Overrides { q: Some("1.2".into()), ..Overrides::default() };
        assert!(RunConfig::default().apply(o).is_err());
        let o = Overrides { theta: Some(2.0), ..Overrides::default() };
        assert!(RunConfig::default().apply(o).is_err());
    }
}
