//! Machine-readable reports and their text rendering.

use std::fmt::Write as _;
use std::path::Path;

use qwass::linalg::HermitianMatrix;
use serde::{Deserialize, Serialize};

use crate::instance::InstanceFile;
use crate::{CliError, Result};

/// Significant digits of every float in text output.
pub const SIG_DIGITS: usize = 12;

/// A complex matrix as real and imaginary row arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixEcho {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&HermitianMatrix> for MatrixEcho {
    fn from(m: &HermitianMatrix) -> Self {
        let n = m.dim();
        let row = |i: usize, f: fn(qwass::linalg::C64) -> f64| (0..n).map(|j| f(m[(i, j)])).collect();
        Self { re: (0..n).map(|i| row(i, |z| z.re)).collect(), im: (0..n).map(|i| row(i, |z| z.im)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEcho {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub min_eig_x: f64,
    pub min_eig_s: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialsEcho {
    pub x: Vec<MatrixEcho>,
    pub y: Vec<MatrixEcho>,
    pub objective: f64,
    pub min_slack: f64,
    pub attained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEcho {
    pub cross: f64,
    pub self_rho: f64,
    pub self_omega: f64,
    pub squared: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormEcho {
    pub formula: String,
    pub value: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub command: String,
    pub instance: InstanceFile,
    pub status: String,
    pub iterations: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    /// `D^p`.
    pub value: f64,
    /// `D`.
    pub distance: f64,
    pub degenerate: bool,
    pub certificate: CertificateEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<PotentialsEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergenceEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormEcho>,
    pub timing_ms: f64,
}

/// One row of the strict-gap table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub p: f64,
    pub nonlinear: f64,
    pub linearized: f64,
    pub difference: f64,
}

/// `x` with [`SIG_DIGITS`] significant digits, in fixed or scientific
/// notation depending on magnitude, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.prec$e}", prec = SIG_DIGITS - 1);
        let (mantissa, e) = s.split_once('e').expect("scientific format has an exponent");
        let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        format!("{mantissa}e{e}")
    }
}

fn matrix_lines(out: &mut String, name: &str, m: &MatrixEcho) {
    let n = m.re.len();
    for i in 0..n {
        let cells: Vec<String> = (0..n)
            .map(|j| {
                let (re, im) = (m.re[i][j], m.im[i][j]);
                if im == 0.0 {
                    fmt_sig(re)
                } else {
                    format!("{}{}{}i", fmt_sig(re), if im < 0.0 { "-" } else { "+" }, fmt_sig(im.abs()))
                }
            })
            .collect();
        let label = if i == 0 { name } else { "" };
        writeln!(out, "{label:<20}[{}]", cells.join(", ")).unwrap();
    }
}

impl ReportRecord {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k:<20}{v}").unwrap();
        kv("command", self.command.clone());
        kv("cost", format!("{:?}", self.instance.cost).to_lowercase());
        kv("mode", format!("{:?}", self.instance.mode).to_lowercase());
        kv("p", fmt_sig(self.instance.p));
        kv("status", self.status.clone());
        kv("iterations", self.iterations.to_string());
        kv("primal", fmt_sig(self.primal));
        kv("dual", fmt_sig(self.dual));
        kv("gap", fmt_sig(self.gap));
        kv("value", fmt_sig(self.value));
        kv("distance", fmt_sig(self.distance));
        kv("degenerate", self.degenerate.to_string());
        let c = &self.certificate;
        kv("primal_residual", fmt_sig(c.primal_residual));
        kv("dual_residual", fmt_sig(c.dual_residual));
        kv("min_eig_x", fmt_sig(c.min_eig_x));
        kv("min_eig_s", fmt_sig(c.min_eig_s));
        kv("certified", c.passed.to_string());
        if let Some(d) = &self.divergence {
            kv("cross", fmt_sig(d.cross));
            kv("self_rho", fmt_sig(d.self_rho));
            kv("self_omega", fmt_sig(d.self_omega));
            kv("divergence_sq", fmt_sig(d.squared));
            kv("divergence", fmt_sig(d.value));
        }
        if let Some(cf) = &self.closed_form {
            kv("closed_form", cf.formula.clone());
            kv("closed_form_value", fmt_sig(cf.value));
            kv("closed_form_dev", fmt_sig(cf.deviation));
        }
        kv("timing_ms", fmt_sig(self.timing_ms));
        if let Some(pots) = &self.potentials {
            writeln!(out, "{:<20}{}", "potential_obj", fmt_sig(pots.objective)).unwrap();
            writeln!(out, "{:<20}{}", "min_slack", fmt_sig(pots.min_slack)).unwrap();
            writeln!(out, "{:<20}{}", "attained", pots.attained).unwrap();
            for (k, (x, y)) in pots.x.iter().zip(&pots.y).enumerate() {
                matrix_lines(&mut out, &format!("X{}", k + 1), x);
                matrix_lines(&mut out, &format!("Y{}", k + 1), y);
            }
        }
        out
    }
}

pub fn gap_table(rows: &[GapRow]) -> String {
    let mut out = format!("{:<20}{:<20}{:<20}{}\n", "p", "nonlinear", "linearized", "difference");
    for r in rows {
        writeln!(
            out,
            "{:<20}{:<20}{:<20}{}",
            fmt_sig(r.p),
            fmt_sig(r.nonlinear),
            fmt_sig(r.linearized),
            fmt_sig(r.difference)
        )
        .unwrap();
    }
    out
}

/// Writes `value` to `path` as a single JSON line.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).map_err(CliError::failure)?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(4.0), "4");
        assert_eq!(fmt_sig(2.0 - 3f64.sqrt()), "0.267949192431");
        assert_eq!(fmt_sig(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(fmt_sig(-2.5359), "-2.5359");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_sig(0.0), "0");
    }
}
