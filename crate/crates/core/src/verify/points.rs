//! Chart points supplied as json documents, and bracket matrices as json.

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use super::config::{parse_complex, RunConfig};
use super::sampling::{sample_positions, sample_ratio, sample_rng};
use super::complex_json;
use crate::charts::{BracketFamily, BracketMatrix, ChartKind, ChartPoint, ReducedChartPoint, UnreducedChartPoint};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ComplexEntry {
    Pair([f64; 2]),
    Real(f64),
    Text(String),
}

impl ComplexEntry {
    fn value(&self) -> Result<Complex64> {
        match self {
            ComplexEntry::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
            ComplexEntry::Real(re) => Ok(Complex64::new(*re, 0.0)),
            ComplexEntry::Text(t) => parse_complex(t),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    family: String,
    w: Vec<Vec<ComplexEntry>>,
    #[serde(default)]
    fiber: Option<Vec<Vec<ComplexEntry>>>,
    #[serde(default)]
    ratio: Option<Vec<Vec<ComplexEntry>>>,
}

fn rows(doc: &[Vec<ComplexEntry>]) -> Result<Vec<Vec<Complex64>>> {
    doc.iter().map(|r| r.iter().map(ComplexEntry::value).collect()).collect()
}

/// Bracket family by name, the elliptic one over the configured lattice.
pub fn family_by_name(cfg: &RunConfig, name: &str) -> Result<BracketFamily> {
    match name {
        "rational" => Ok(BracketFamily::Rational),
        "coulomb" => Ok(BracketFamily::Coulomb),
        "elliptic_fo" => Ok(BracketFamily::EllipticFo { mp: cfg.mp }),
        "coulomb_reduced" => Ok(BracketFamily::CoulombReduced),
        other => Err(Error::Schema {
            field: "family".into(),
            reason: format!("unknown bracket family `{other}`"),
        }),
    }
}

fn missing(field: &str, family: &str) -> Error {
    Error::Schema {
        field: field.into(),
        reason: format!("the {family} chart needs `{field}`"),
    }
}

/// Reads `{"family": ..., "w": [[...]], "fiber" | "ratio": [[...]]}` over the
/// configured quiver and degree. `w` lists all positions of each color; the
/// reduced families take `ratio` with `a_i - 1` entries per color.
pub fn parse_chart_point(cfg: &RunConfig, document: &str) -> Result<(BracketFamily, ChartPoint)> {
    let doc: PointDoc = serde_json::from_str(document).map_err(|e| Error::Schema {
        field: "point".into(),
        reason: e.to_string(),
    })?;
    let family = family_by_name(cfg, &doc.family)?;
    let w = rows(&doc.w)?;
    let (q, a) = (cfg.quiver.clone(), cfg.alpha.clone());
    let point: ChartPoint = match family {
        BracketFamily::Rational | BracketFamily::Coulomb => {
            let kind = if family == BracketFamily::Rational { ChartKind::Zastava } else { ChartKind::Coulomb };
            let fiber = rows(doc.fiber.as_deref().ok_or_else(|| missing("fiber", &doc.family))?)?;
            UnreducedChartPoint::new(q, a, kind, w, fiber)?
                .with_separation(cfg.tolerances.delta)
                .into()
        }
        BracketFamily::EllipticFo { .. } | BracketFamily::CoulombReduced => {
            let kind = if family == BracketFamily::CoulombReduced { ChartKind::Coulomb } else { ChartKind::Zastava };
            let ratio = rows(doc.ratio.as_deref().ok_or_else(|| missing("ratio", &doc.family))?)?;
            ReducedChartPoint::from_full_w(q, a, kind, w, ratio)?
                .with_separation(cfg.tolerances.delta)
                .into()
        }
    };
    Ok((family, point))
}

/// A seeded chart point for `family` over the configured quiver and degree.
pub fn sample_chart_point(cfg: &RunConfig, family: &BracketFamily) -> Result<ChartPoint> {
    let mut rng = sample_rng(cfg.seed, u64::MAX >> 24, 0);
    let w = sample_positions(&mut rng, &cfg.alpha, &cfg.mp, cfg.tolerances.delta)?;
    let draw = |rng: &mut _, minus: usize| -> Vec<Vec<Complex64>> {
        cfg.alpha
            .coefficients()
            .iter()
            .map(|&a| (0..(a as usize).saturating_sub(minus)).map(|_| sample_ratio(rng)).collect())
            .collect()
    };
    let (q, a, delta) = (cfg.quiver.clone(), cfg.alpha.clone(), cfg.tolerances.delta);
    Ok(match family {
        BracketFamily::Rational => UnreducedChartPoint::new(q, a, ChartKind::Zastava, w, draw(&mut rng, 0))?.with_separation(delta).into(),
        BracketFamily::Coulomb => UnreducedChartPoint::new(q, a, ChartKind::Coulomb, w, draw(&mut rng, 0))?.with_separation(delta).into(),
        BracketFamily::EllipticFo { .. } => {
            ReducedChartPoint::from_full_w(q, a, ChartKind::Zastava, w, draw(&mut rng, 1))?.with_separation(delta).into()
        }
        BracketFamily::CoulombReduced => {
            ReducedChartPoint::from_full_w(q, a, ChartKind::Coulomb, w, draw(&mut rng, 1))?.with_separation(delta).into()
        }
    })
}

/// `{"labels": [...], "matrix": [[[re, im], ...], ...]}`.
pub fn bracket_matrix_json(m: &BracketMatrix) -> Value {
    let n = m.dim();
    json!({
        "labels": m.labels().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "matrix": (0..n).map(|a| m.row(a).iter().map(|&z| complex_json(z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::bracket_field;
    use crate::verify::parse_config;

    #[test]
    fn reads_points_of_each_family() {
        let cfg = parse_config(r#"{"tau": "i", "quiver": "A2", "alpha": [2, 1]}"#).unwrap();
        let doc = r#"{"family": "rational", "w": [[[0.1, 0], "0.2+0.1i"], [[-0.3, 0]]], "fiber": [[1, 2], ["i"]]}"#;
        let (family, point) = parse_chart_point(&cfg, doc).unwrap();
        let m = bracket_field(&family, &point).unwrap().into_matrix();
        let v = bracket_matrix_json(&m);
        assert_eq!(v["labels"].as_array().unwrap().len(), 6);
        let doc = r#"{"family": "elliptic_fo", "w": [[[0.1, 0], [0.2, 0.1]], [[-0.3, 0]]], "ratio": [[[1.5, 0]], []]}"#;
        let (_, point) = parse_chart_point(&cfg, doc).unwrap();
        assert_eq!(point.dim(), 2);
        let bad = r#"{"family": "elliptic_fo", "w": [[[0.1, 0], [0.2, 0.1]], [[-0.3, 0]]]}"#;
        assert!(matches!(parse_chart_point(&cfg, bad), Err(Error::Schema { .. })));
        for family in ["rational", "coulomb", "elliptic_fo", "coulomb_reduced"] {
            let f = family_by_name(&cfg, family).unwrap();
            assert!(sample_chart_point(&cfg, &f).is_ok());
        }
    }
}
