//! Moment maps, Hamiltonians and classical RK4 integration of Hamiltonian flows.

use num_complex::Complex64;
use serde::Serialize;

use super::brackets::bracket_matrix;
use super::{hamiltonian_vector_field, order_free_sum, BracketFamily, ChartPoint, CoordLabel, UnreducedChartPoint};
use crate::error::{Error, Result};
use crate::quiver::Quiver;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `i -> sum_r w_{i,r}`.
pub fn moment_map(p: &UnreducedChartPoint) -> Vec<Complex64> {
    p.w_all().iter().map(|ws| order_free_sum(ws)).collect()
}

fn moment_of(point: &ChartPoint) -> Vec<Complex64> {
    match point {
        ChartPoint::Unreduced(p) => moment_map(p),
        ChartPoint::Reduced(p) => (0..p.quiver().rank()).map(|i| order_free_sum(&p.full_w(i))).collect(),
    }
}

/// A Hamiltonian function on a chart.
#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    /// One chart coordinate, by position in the coordinate vector.
    Coordinate(usize),
    /// The moment component `sum_r w_{i,r}` of vertex `i`.
    Moment(usize),
    Constant(Complex64),
}

impl Hamiltonian {
    /// Parses `moment:<vertex>`, `const` / `const:<re>` or a coordinate label
    /// such as `w[1,2]`.
    pub fn parse(text: &str, point: &ChartPoint) -> Result<Self> {
        let quiver: &Quiver = point.quiver();
        if let Some(v) = text.strip_prefix("moment:") {
            return Ok(Hamiltonian::Moment(quiver.index_of(v.trim())?));
        }
        if text == "const" {
            return Ok(Hamiltonian::Constant(ZERO));
        }
        if let Some(v) = text.strip_prefix("const:") {
            let re: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad constant `{v}`")))?;
            return Ok(Hamiltonian::Constant(Complex64::new(re, 0.0)));
        }
        let label = CoordLabel::parse(text, quiver)?;
        point
            .labels()
            .iter()
            .position(|l| *l == label)
            .map(Hamiltonian::Coordinate)
            .ok_or_else(|| Error::InvalidArgument(format!("coordinate `{text}` is not on this chart")))
    }

    pub fn value(&self, point: &ChartPoint) -> Result<Complex64> {
        match *self {
            Hamiltonian::Coordinate(k) => point
                .coords()
                .get(k)
                .copied()
                .ok_or(Error::DimensionMismatch {
                    expected: point.dim(),
                    found: k,
                }),
            Hamiltonian::Moment(i) => moment_of(point)
                .get(i)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(i.to_string())),
            Hamiltonian::Constant(c) => Ok(c),
        }
    }

    /// Gradient in the chart coordinates. On a reduced chart the moment is
    /// the fixed sum, hence constant.
    pub fn gradient(&self, point: &ChartPoint) -> Result<Vec<Complex64>> {
        let n = point.dim();
        let mut g = vec![ZERO; n];
        match *self {
            Hamiltonian::Coordinate(k) => {
                if k >= n {
                    return Err(Error::DimensionMismatch { expected: n, found: k });
                }
                g[k] = Complex64::new(1.0, 0.0);
            }
            Hamiltonian::Moment(i) => {
                if i >= point.quiver().rank() {
                    return Err(Error::UnknownVertex(i.to_string()));
                }
                if let ChartPoint::Unreduced(p) = point {
                    for r in 0..p.w(i).len() {
                        g[p.w_slot(i, r)] = Complex64::new(1.0, 0.0);
                    }
                }
            }
            Hamiltonian::Constant(_) => {}
        }
        Ok(g)
    }
}

/// Trajectory and conservation diagnostics of an integrated flow.
#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    #[serde(serialize_with = "crate::verify::serialize_complex_rows")]
    pub trajectory: Vec<Vec<Complex64>>,
    /// `max_t |H(x_t) - H(x_0)|`.
    pub h_drift: f64,
    /// Per vertex, `max_t |mu_i(x_t) - mu_i(x_0)|`.
    pub moment_drift: Vec<f64>,
    #[serde(skip)]
    pub final_point: Option<ChartPoint>,
}

fn velocity(family: &BracketFamily, point: &ChartPoint, h: &Hamiltonian) -> Result<Vec<Complex64>> {
    let bm = bracket_matrix(family, point)?;
    hamiltonian_vector_field(&bm, &h.gradient(point)?)
}

fn check_generic(family: &BracketFamily, point: &ChartPoint) -> Result<()> {
    match point {
        ChartPoint::Unreduced(p) => p.check_separation(family.lattice(), *family == BracketFamily::Rational),
        ChartPoint::Reduced(p) => p.check_separation(family.lattice()),
    }
}

fn left_chart(step: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::CoincidentPoints { .. } | Error::PoleAtLatticePoint { .. } | Error::InvalidPoint(_) => {
            Error::TrajectoryLeftChart {
                step,
                reason: e.to_string(),
            }
        }
        other => other,
    }
}

/// Integrates `dx/dt = {x, H}` with the classical fourth-order Runge-Kutta
/// scheme and records every step.
pub fn flow_integrate(
    family: &BracketFamily,
    point: &ChartPoint,
    h: &Hamiltonian,
    t_end: f64,
    steps: usize,
) -> Result<FlowReport> {
    if steps == 0 || !t_end.is_finite() {
        return Err(Error::InvalidArgument("flow needs a finite end time and at least one step".into()));
    }
    check_generic(family, point).map_err(left_chart(0))?;
    let dt = t_end / steps as f64;
    let h0 = h.value(point)?;
    let mu0 = moment_of(point);
    let mut current = point.clone();
    let mut x = current.coords();
    let mut report = FlowReport {
        labels: point.labels().iter().map(ToString::to_string).collect(),
        times: vec![0.0],
        trajectory: vec![x.clone()],
        h_drift: 0.0,
        moment_drift: vec![0.0; mu0.len()],
        final_point: None,
    };
    let axpy = |x: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
        x.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    for step in 1..=steps {
        let at = |y: &[Complex64]| -> Result<Vec<Complex64>> {
            let p = current.with_coords(y)?;
            velocity(family, &p, h)
        };
        let map = left_chart(step);
        let k1 = at(&x).map_err(&map)?;
        let k2 = at(&axpy(&x, &k1, dt / 2.0)).map_err(&map)?;
        let k3 = at(&axpy(&x, &k2, dt / 2.0)).map_err(&map)?;
        let k4 = at(&axpy(&x, &k3, dt)).map_err(&map)?;
        for (a, ((b1, b2), (b3, b4))) in x.iter_mut().zip(k1.iter().zip(&k2).zip(k3.iter().zip(&k4))) {
            *a += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        }
        current = current.with_coords(&x).map_err(&map)?;
        check_generic(family, &current).map_err(&map)?;
        report.h_drift = report.h_drift.max((h.value(&current)? - h0).norm());
        for (d, (m, m0)) in report.moment_drift.iter_mut().zip(moment_of(&current).iter().zip(&mu0)) {
            *d = d.max((m - m0).norm());
        }
        report.times.push(step as f64 * dt);
        report.trajectory.push(x.clone());
    }
    report.final_point = Some(current);
    Ok(report)
}
