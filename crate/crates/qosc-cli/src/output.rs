//! Report and table writers.

use std::io::Write;

use qosc::report::Params;
use qosc::{IdentityReport, Verdict};

use crate::config::Format;
use crate::CliError;

fn params_field(p: &Params) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

pub fn write_reports(out: &mut dyn Write, reports: &[IdentityReport], format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, reports).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["identity_id", "params", "residual", "tolerance", "verdict", "wall_time_ms"])?;
            for r in reports {
                w.write_record([
                    r.identity_id.clone(),
                    params_field(&r.params),
                    format!("{:e}", r.residual),
                    format!("{:e}", r.tolerance),
                    r.verdict.to_string(),
                    format!("{:.3}", r.wall_time_ms),
                ])?;
            }
            w.flush()?;
        }
        Format::Human => {
            for r in reports {
                writeln!(
                    out,
                    "{:<13} {:<36} residual {:>9.2e}  tol {:>7.1e}  {}",
                    r.verdict.to_string(),
                    r.identity_id,
                    r.residual,
                    r.tolerance,
                    params_field(&r.params)
                )?;
            }
            let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
            writeln!(
                out,
                "{} reports: {} PASS, {} EXPECTED_FAIL, {} SKIPPED, {} FAIL",
                reports.len(),
                count(Verdict::Pass),
                count(Verdict::ExpectedFail),
                count(Verdict::Skipped),
                count(Verdict::Fail)
            )?;
        }
    }
    Ok(())
}

/// Numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(|v| v.to_string()))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let objects: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|row| self.columns.iter().map(|c| c.to_string()).zip(row.iter().map(|&v| v.into())).collect())
                    .collect();
                serde_json::to_writer_pretty(&mut *out, &objects).map_err(std::io::Error::from)?;
                writeln!(out)?;
            }
            Format::Human => {
                let line: Vec<String> = self.columns.iter().map(|c| format!("{c:>14}")).collect();
                writeln!(out, "{}", line.join(" "))?;
                for row in &self.rows {
                    let line: Vec<String> = row
                        .iter()
                        .map(|&v| if v.fract() == 0.0 && v.abs() < 1e6 { format!("{v:>14}") } else { format!("{v:>14.6e}") })
                        .collect();
                    writeln!(out, "{}", line.join(" "))?;
                }
            }
        }
        Ok(())
    }
}
