//! Verification reports: a JSON document and a plain-text table.
//!
//! Reports are deterministic for fixed inputs, seed and tool version.
//! Wall-clock timing is only recorded when asked for.

use std::fmt::Write as _;

use serde::Serialize;

use sewcell_core::nullity::NullityFit;
use sewcell_core::PointSample;

pub const TOOL: &str = "sewcell";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub copies: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            points: 25,
            seed: 7,
            tol: 1e-8,
            convention: None,
            copies: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub subject: String,
    pub suite: String,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub subject: String,
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullityRow {
    pub draw: u64,
    pub coords: Vec<f64>,
    pub kappa: f64,
    pub mu: f64,
    pub mu_prime: f64,
    pub residual: f64,
    pub mu_determined: bool,
}

impl NullityRow {
    pub fn new(sample: &PointSample, fit: &NullityFit) -> Self {
        NullityRow {
            draw: sample.draw,
            coords: sample.coords.clone(),
            kappa: fit.kappa,
            mu: fit.mu,
            mu_prime: fit.mu_prime,
            residual: fit.residual,
            mu_determined: fit.mu_determined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullityTable {
    pub subject: String,
    pub convention: String,
    pub coords: Vec<String>,
    pub rows: Vec<NullityRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub settings: Settings,
    pub inputs: Vec<FileDigest>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<FileDigest>,
    pub checks: Vec<Check>,
    pub verdicts: Vec<Verdict>,
    pub nullity: Vec<NullityTable>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(command: &str, settings: Settings) -> Self {
        Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            settings,
            inputs: Vec::new(),
            outputs: Vec::new(),
            checks: Vec::new(),
            verdicts: Vec::new(),
            nullity: Vec::new(),
            passed: true,
            timing: None,
        }
    }

    /// Passes when `residual ≤ tolerance`; a NaN residual fails.
    pub fn check(&mut self, subject: &str, suite: &str, name: &str, residual: f64, tolerance: f64) {
        self.push(subject, suite, name, residual, tolerance, residual <= tolerance);
    }

    /// Boolean check, recorded as residual 0 or 1 against tolerance 0.
    pub fn flag(&mut self, subject: &str, suite: &str, name: &str, ok: bool) {
        self.push(subject, suite, name, if ok { 0.0 } else { 1.0 }, 0.0, ok);
    }

    fn push(&mut self, subject: &str, suite: &str, name: &str, residual: f64, tolerance: f64, pass: bool) {
        self.passed &= pass;
        self.checks.push(Check {
            subject: subject.into(),
            suite: suite.into(),
            name: name.into(),
            residual,
            tolerance,
            pass,
        });
    }

    pub fn verdict(&mut self, subject: &str, name: &str, value: impl ToString) {
        self.verdicts.push(Verdict {
            subject: subject.into(),
            name: name.into(),
            value: value.to_string(),
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.settings;
        let _ = write!(
            out,
            "{} {} {}  points={} seed={} tol={:e}",
            self.tool, self.version, self.command, s.points, s.seed, s.tol
        );
        if let Some(c) = &s.convention {
            let _ = write!(out, " convention={}", c);
        }
        if let Some(k) = s.copies {
            let _ = write!(out, " copies={}", k);
        }
        out.push('\n');
        for (label, files) in [("input", &self.inputs), ("output", &self.outputs)] {
            for f in files.iter() {
                let _ = writeln!(out, "{:<7}{}  sha256:{}", label, f.path, f.sha256);
            }
        }
        if !self.checks.is_empty() {
            out.push_str("\nchecks\n");
            let rows: Vec<[String; 5]> = self
                .checks
                .iter()
                .map(|c| {
                    [
                        c.subject.clone(),
                        format!("{}/{}", c.suite, c.name),
                        format!("{:.3e}", c.residual),
                        format!("{:.0e}", c.tolerance),
                        if c.pass { "pass" } else { "FAIL" }.into(),
                    ]
                })
                .collect();
            table(&mut out, &["subject", "check", "residual", "tol", ""], &rows);
        }
        if !self.verdicts.is_empty() {
            out.push_str("\nverdicts\n");
            let rows: Vec<[String; 3]> = self
                .verdicts
                .iter()
                .map(|v| [v.subject.clone(), v.name.clone(), v.value.clone()])
                .collect();
            table(&mut out, &["subject", "verdict", "value"], &rows);
        }
        for t in &self.nullity {
            let _ = writeln!(out, "\nnullity of {} ({} h')", t.subject, t.convention);
            let rows: Vec<[String; 6]> = t
                .rows
                .iter()
                .map(|r| {
                    let coords: Vec<String> = r.coords.iter().map(|c| format!("{:.4}", c)).collect();
                    let mark = if r.mu_determined { "" } else { "*" };
                    [
                        r.draw.to_string(),
                        coords.join(" "),
                        format!("{:.9}", r.kappa),
                        format!("{:.9}{}", r.mu, mark),
                        format!("{:.9}{}", r.mu_prime, mark),
                        format!("{:.2e}", r.residual),
                    ]
                })
                .collect();
            let coords = format!("({})", t.coords.join(", "));
            table(&mut out, &["draw", &coords, "kappa", "mu", "mu'", "residual"], &rows);
            if t.rows.iter().any(|r| !r.mu_determined) {
                out.push_str("  * h vanishes, mu and mu' undetermined\n");
            }
        }
        if let Some(t) = &self.timing {
            let _ = writeln!(out, "\nelapsed {:.1} ms", t.elapsed_ms);
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        if self.passed {
            let _ = writeln!(out, "\nresult: PASS ({} checks)", self.checks.len());
        } else {
            let _ = writeln!(out, "\nresult: FAIL ({} of {} checks)", failed, self.checks.len());
        }
        out
    }
}

fn table<const N: usize>(out: &mut String, header: &[&str; N], rows: &[[String; N]]) {
    let mut widths: [usize; N] = core::array::from_fn(|i| header[i].chars().count());
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut line = |cells: &[&str]| {
        let mut s = String::from(" ");
        for (i, c) in cells.iter().enumerate() {
            let _ = write!(s, " {:<w$}", c, w = widths[i]);
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(header);
    for r in rows {
        let cells: Vec<&str> = r.iter().map(String::as_str).collect();
        line(&cells);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_residual_fails() {
        let mut r = Report::new("verify", Settings::default());
        r.check("m", "axioms", "phi", 1e-12, 1e-8);
        assert!(r.passed);
        r.check("m", "axioms", "eta", f64::NAN, 1e-8);
        assert!(!r.passed);
        assert!(r.to_text().contains("FAIL (1 of 2 checks)"));
    }

    #[test]
    fn timing_is_absent_unless_requested() {
        let r = Report::new("verify", Settings::default());
        assert!(!r.to_json().contains("elapsed"));
        assert!(r.to_json().contains("\"tol\": 1e-8"));
    }
}
