//! Configuration loading, seeded verification suites and report emission.

mod config;
mod points;
mod report;
mod sampling;
mod suites;

pub use config::{load_config, parse_complex, parse_config, RunConfig, Suite, Tolerances, SEED_ENV};
pub use points::{bracket_matrix_json, family_by_name, parse_chart_point, sample_chart_point};
pub use report::{emit_report, write_report, Check, Bound, FailureRecord, ReportFormat, SuiteReport, VerificationReport};
pub use sampling::{sample_four_points, sample_positions, sample_ratio, sample_rng, sample_w};
pub use suites::{run_suite, run_suites, RunOptions};

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};

/// Serializes a complex number as `[re, im]`.
pub fn serialize_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&[z.re, z.im], s)
}

/// Serializes a slice of complex numbers as a list of `[re, im]` pairs.
pub fn serialize_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Serializes rows of complex numbers as nested `[re, im]` lists.
pub fn serialize_complex_rows<S: Serializer>(rows: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for row in rows {
        seq.serialize_element(&row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())?;
    }
    seq.end()
}

pub(crate) fn complex_json(z: Complex64) -> serde_json::Value {
    serde_json::json!([z.re, z.im])
}

pub(crate) fn complex_rows_json(rows: &[Vec<Complex64>]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|r| serde_json::Value::Array(r.iter().map(|&z| complex_json(z)).collect()))
            .collect(),
    )
}
