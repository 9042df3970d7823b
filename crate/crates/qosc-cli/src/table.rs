//! Weight tables over spin or rapidity grids.

use std::str::FromStr;

use qosc::fock::weight_v;
use qosc::modular::{weight_v_modular, ModularContext};
use qosc::vgamma::{GammaContext, KMWeightSet};
use qosc::{QContext, C};

use crate::config::{parse_complex, GammaSpec};
use crate::output::Table;
use crate::CliError;

/// Tabulated weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightId {
    /// `fock.V`: `V_x(m, m')` over a spin square.
    Fock,
    /// `vgamma.Vbold`: `V_x(a, b)` of the Kashiwara-Miwa weights.
    Bold,
    /// `modular.V`: `V_mu(x, y)` over a real rapidity grid.
    Modular,
}

impl FromStr for WeightId {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fock.V" => Ok(WeightId::Fock),
            "vgamma.Vbold" => Ok(WeightId::Bold),
            "modular.V" => Ok(WeightId::Modular),
            _ => Err(CliError::Usage(format!(
                "unknown weight id {s:?}; expected one of fock.V, vgamma.Vbold, modular.V"
            ))),
        }
    }
}

/// Inclusive integer range `a:b`.
pub fn parse_spins(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Usage(format!("spin range must look like 0:5, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.trim().parse::<i64>().map_err(|_| bad())?, b.trim().parse::<i64>().map_err(|_| bad())?);
    if a > b || b - a > 200 {
        return Err(bad());
    }
    Ok((a, b))
}

/// `start:end:count` with `count >= 1` evenly spaced points.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid must look like -1:1:5, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b) = (a.trim().parse::<f64>().map_err(|_| bad())?, b.trim().parse::<f64>().map_err(|_| bad())?);
    let n = n.trim().parse::<usize>().map_err(|_| bad())?;
    if n == 0 || n > 1000 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Grid and model parameters of one table.
#[derive(Debug, Clone)]
pub struct TableRequest {
    pub weight: WeightId,
    pub q: C,
    /// Spectral parameter; the literal `q` selects the nome itself.
    pub x: String,
    pub spins: (i64, i64),
    pub gamma: GammaSpec,
    pub mu: C,
    pub theta: f64,
    pub grid: Vec<f64>,
}

pub fn tabulate(r: &TableRequest) -> Result<Table, CliError> {
    let ctx = QContext::new(r.q)?;
    let x = if r.x.trim() == "q" { ctx.q() } else { parse_complex(&r.x)? };
    let spin_pairs = || (r.spins.0..=r.spins.1).flat_map(|m| (r.spins.0..=r.spins.1).map(move |mp| (m, mp)));
    let rows = match r.weight {
        WeightId::Fock => spin_pairs()
            .map(|(m, mp)| {
                let v = weight_v(x, m, mp, &ctx)?;
                Ok(vec![m as f64, mp as f64, v.re, v.im])
            })
            .collect::<qosc::Result<Vec<_>>>()?,
        WeightId::Bold => {
            let gc = match r.gamma {
                GammaSpec::Generic(g) => GammaContext::generic(g, 40, &ctx)?,
                GammaSpec::Selected(n) => GammaContext::selected(n, 40, &ctx)?,
            };
            let w = KMWeightSet::new(gc);
            spin_pairs()
                .map(|(a, b)| {
                    let v = w.v_bold(x, a, b, &ctx)?;
                    Ok(vec![a as f64, b as f64, v.re, v.im])
                })
                .collect::<qosc::Result<Vec<_>>>()?
        }
        WeightId::Modular => {
            let mc = ModularContext::new(r.theta)?;
            let mut rows = Vec::with_capacity(r.grid.len() * r.grid.len());
            for &a in &r.grid {
                for &b in &r.grid {
                    let v = weight_v_modular(r.mu, C::new(a, 0.0), C::new(b, 0.0), &mc)?;
                    rows.push(vec![a, b, v.re, v.im]);
                }
            }
            rows
        }
    };
    let columns = match r.weight {
        WeightId::Fock => vec!["m", "mp", "re", "im"],
        WeightId::Bold => vec!["a", "b", "re", "im"],
        WeightId::Modular => vec!["x", "y", "re", "im"],
    };
    Ok(Table { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(weight: WeightId) -> TableRequest {
        TableRequest {
            weight,
            q: C::new(0.4, 0.0),
            x: "0.7".into(),
            spins: (0, 5),
            gamma: GammaSpec::Selected(0),
            mu: C::new(0.0, 0.3),
            theta: std::f64::consts::PI / 5.0,
            grid: parse_grid("-1:1:5").unwrap(),
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_spins("0:5").unwrap(), (0, 5));
        assert!(parse_grid("1:2").is_err());
        assert!(parse_spins("5:0").is_err());
        assert!("fock.W".parse::<WeightId>().is_err());
    }

    #[test]
    fn fock_square_has_36_rows() {
        assert_eq!(tabulate(&request(WeightId::Fock)).unwrap().rows.len(), 36);
    }

    #[test]
    fn bold_weight_at_q_is_one() {
        let mut r = request(WeightId::Bold);
        r.x = "q".into();
        r.spins = (-3, 3);
        for row in tabulate(&r).unwrap().rows {
            assert!((row[2] - 1.0).abs() < 1e-12 && row[3].abs() < 1e-12, "{row:?}");
        }
    }

    #[test]
    fn modular_table_is_symmetric() {
        let t = tabulate(&request(WeightId::Modular)).unwrap();
        let n = 5;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (&t.rows[i * n + j], &t.rows[j * n + i]);
                let scale = a[2].hypot(a[3]);
                assert!((a[2] - b[2]).hypot(a[3] - b[3]) <= 1e-9 * scale, "{a:?} {b:?}");
            }
        }
    }
}
