use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a check value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "limit")]
pub enum Bound {
    /// `value <= limit`; such values count as residuals.
    AtMost(f64),
    /// `value >= limit`, for convergence orders and improvement factors.
    AtLeast(f64),
    /// `1 / limit <= value <= limit`.
    WithinFactor(f64),
}

impl Bound {
    pub fn holds(&self, value: f64) -> bool {
        match *self {
            Bound::AtMost(l) => value <= l,
            Bound::AtLeast(l) => value >= l,
            Bound::WithinFactor(l) => value >= 1.0 / l && value <= l,
        }
    }
}

/// One numerical check; `value` is `None` when it was not finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub bound: Bound,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Check {
            name: name.into(),
            value: value.is_finite().then_some(value),
            bound,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(name, value, Bound::AtMost(limit))
    }

    pub fn passed(&self) -> bool {
        self.value.is_some_and(|v| self.bound.holds(v))
    }
}

/// A failed check or an error, with the sample that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    /// Sample index, `None` for checks that do not depend on a sample.
    pub sample: Option<usize>,
    pub check: String,
    pub value: Option<f64>,
    pub bound: Option<Bound>,
    pub error: Option<String>,
    pub point: serde_json::Value,
}

/// Aggregated checks of one suite. The worst residual is the largest value
/// among the `AtMost` checks; `estimates` holds the extreme value of every
/// other check (orders, ratios).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub samples: usize,
    pub checks: usize,
    /// All failed checks and errors; `failures` keeps the first few.
    pub failure_count: usize,
    pub max_residual: f64,
    /// Largest value per `AtMost` check name.
    pub residuals: BTreeMap<String, f64>,
    /// Least favorable value per non-residual check name.
    pub estimates: BTreeMap<String, f64>,
    pub worst: Option<FailureRecord>,
    pub failures: Vec<FailureRecord>,
}

/// Failure records kept per suite; the count of all failures is still exact.
pub const MAX_FAILURE_RECORDS: usize = 20;

impl SuiteReport {
    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// The outcome of a run. Timings live in their own section so that the rest
/// of the document is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub passed: bool,
    pub config: serde_json::Value,
    pub suites: Vec<SuiteReport>,
    /// Seconds per suite.
    pub timings: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn new(config: serde_json::Value, suites: Vec<SuiteReport>, timings: BTreeMap<String, f64>) -> Self {
        VerificationReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            passed: suites.iter().all(|s| s.passed),
            config,
            suites,
            timings,
        }
    }

    /// The report without its timing section.
    pub fn without_timings(&self) -> VerificationReport {
        VerificationReport {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::InvalidArgument(format!("unknown report format `{other}`"))),
        }
    }
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

/// Renders a report as pretty json or as one line per suite.
pub fn emit_report(report: &VerificationReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).map_err(|e| Error::InvalidArgument(format!("report serialization: {e}")))
        }
        ReportFormat::Text => {
            let mut out = String::new();
            for s in &report.suites {
                let mut line = format!(
                    "{} {:<20} max_residual={} samples={}",
                    s.status(),
                    s.suite,
                    sci(s.max_residual),
                    s.samples
                );
                for (k, v) in &s.estimates {
                    line.push_str(&format!(" {k}={}", sci(*v)));
                }
                if s.failure_count > 0 {
                    line.push_str(&format!(" failures={}", s.failure_count));
                }
                out.push_str(&line);
                out.push('\n');
            }
            out.push_str(if report.passed { "overall PASS\n" } else { "overall FAIL\n" });
            Ok(out)
        }
    }
}

/// Renders and writes a report.
pub fn write_report(report: &VerificationReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, emit_report(report, format)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid_and_round_trips() {
        let r = VerificationReport::new(serde_json::json!({}), Vec::new(), BTreeMap::new());
        assert!(r.passed);
        let json = emit_report(&r, ReportFormat::Json).unwrap();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(emit_report(&back, ReportFormat::Json).unwrap(), json);
        assert_eq!(emit_report(&r, ReportFormat::Text).unwrap(), "overall PASS\n");
    }

    #[test]
    fn non_finite_values_fail() {
        let c = Check::at_most("x", f64::NAN, 1.0);
        assert_eq!(c.value, None);
        assert!(!c.passed());
        assert!(Bound::WithinFactor(3.0).holds(0.5));
        assert!(!Bound::WithinFactor(3.0).holds(0.2));
    }
}
