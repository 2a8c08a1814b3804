//! Coordinate charts on (reduced) zastava and Coulomb zastava, and the
//! Poisson brackets of their coordinates.
//!
//! Unreduced charts carry `(w_{i,r}, y_{i,r})` (zastava) or `(w_{i,r}, z_{i,r})`
//! (Coulomb) for `1 <= r <= a_i`. Reduced charts fix `sum_r w_{i,r}` and keep
//! only fibre ratios, gauge-fixed against the last index: the free coordinates
//! are `w_{i,r}` and `Y_{i,r} = y_{i,r} / y_{i,a_i}` for `r < a_i`, and
//! `w_{i,a_i}` is derived from the sum constraint.

mod brackets;
mod flow;

pub use brackets::{
    bracket_field, coulomb_bracket_matrix, coulomb_reduced_bracket_matrix, fo_reduced_bracket_matrix,
    hamiltonian_vector_field, jacobiator_residual, rational_bracket_matrix, BracketFamily, BracketField,
    BracketMatrix,
};
pub(crate) use brackets::push_w_derivative;
pub use flow::{flow_integrate, moment_map, FlowReport, Hamiltonian};

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{lattice_distance, ModularParam};
use crate::error::{Error, Result};
use crate::quiver::{Degree, Quiver};

/// Default minimal separation between the points `w` of a generic chart.
pub const DEFAULT_SEPARATION: f64 = 1e-3;

const MIN_FIBER_MODULUS: f64 = 1e-300;

/// Which space the fibre coordinates live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    /// Fibre coordinates `y` of the (elliptic or rational) zastava.
    Zastava,
    /// Fibre coordinates `z` of the Coulomb zastava.
    Coulomb,
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartKind::Zastava => f.write_str("zastava"),
            ChartKind::Coulomb => f.write_str("coulomb"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordKind {
    W,
    Y,
    Z,
    YRatio,
    ZRatio,
}

impl CoordKind {
    fn symbol(self) -> &'static str {
        match self {
            CoordKind::W => "w",
            CoordKind::Y => "y",
            CoordKind::Z => "z",
            CoordKind::YRatio => "Y",
            CoordKind::ZRatio => "Z",
        }
    }
}

/// Name of one chart coordinate, e.g. `Y[2,1]` (indices are 1-based in text).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordLabel {
    pub kind: CoordKind,
    pub vertex: usize,
    pub vertex_id: String,
    /// Zero-based index `r - 1`.
    pub index: usize,
}

impl fmt::Display for CoordLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{},{}]", self.kind.symbol(), self.vertex_id, self.index + 1)
    }
}

impl CoordLabel {
    /// Parses the textual form produced by `Display`, e.g. `w[1,2]`.
    pub fn parse(text: &str, quiver: &Quiver) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse coordinate label `{text}`"));
        let (sym, rest) = text.split_once('[').ok_or_else(bad)?;
        let inner = rest.strip_suffix(']').ok_or_else(bad)?;
        let (vid, idx) = inner.rsplit_once(',').ok_or_else(bad)?;
        let kind = match sym.trim() {
            "w" => CoordKind::W,
            "y" => CoordKind::Y,
            "z" => CoordKind::Z,
            "Y" => CoordKind::YRatio,
            "Z" => CoordKind::ZRatio,
            _ => return Err(bad()),
        };
        let index: usize = idx.trim().parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        let vertex = quiver.index_of(vid.trim())?;
        Ok(CoordLabel {
            kind,
            vertex,
            vertex_id: vid.trim().to_string(),
            index: index - 1,
        })
    }
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Sum that does not depend on the order of its inputs.
fn order_free_sum(values: &[Complex64]) -> Complex64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(cmp_complex);
    sorted.into_iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
}

fn point_distance(a: Complex64, b: Complex64, lattice: Option<&ModularParam>) -> f64 {
    match lattice {
        Some(mp) => lattice_distance(a - b, mp),
        None => (a - b).norm(),
    }
}

/// Checks pairwise separation of colored points; `cross_color_only` skips
/// pairs of the same color.
fn check_points(
    quiver: &Quiver,
    w: &[Vec<Complex64>],
    separation: f64,
    lattice: Option<&ModularParam>,
    cross_color_only: bool,
) -> Result<()> {
    let flat: Vec<(usize, usize, Complex64)> = w
        .iter()
        .enumerate()
        .flat_map(|(i, ws)| ws.iter().enumerate().map(move |(r, &v)| (i, r, v)))
        .collect();
    for (k, &(i, r, a)) in flat.iter().enumerate() {
        for &(j, s, b) in &flat[k + 1..] {
            if cross_color_only && i == j {
                continue;
            }
            let distance = point_distance(a, b, lattice);
            if distance.is_nan() || distance < separation {
                return Err(Error::CoincidentPoints {
                    first: format!("w[{},{}]", quiver.vertices()[i], r + 1),
                    second: format!("w[{},{}]", quiver.vertices()[j], s + 1),
                    distance,
                    separation,
                });
            }
        }
    }
    Ok(())
}

fn check_fibers(values: &[Vec<Complex64>], what: &str) -> Result<()> {
    for (i, vs) in values.iter().enumerate() {
        for (r, v) in vs.iter().enumerate() {
            if !v.is_finite() || v.norm() <= MIN_FIBER_MODULUS {
                return Err(Error::InvalidPoint(format!(
                    "{what} coordinate ({i}, {}) must be finite and nonzero",
                    r + 1
                )));
            }
        }
    }
    Ok(())
}

fn check_shape(values: &[Vec<Complex64>], expected: impl Iterator<Item = usize>, what: &str) -> Result<()> {
    let expected: Vec<usize> = expected.collect();
    if values.len() != expected.len() {
        return Err(Error::InvalidPoint(format!(
            "{what}: expected {} vertices, found {}",
            expected.len(),
            values.len()
        )));
    }
    for (i, (vs, &n)) in values.iter().zip(&expected).enumerate() {
        if vs.len() != n {
            return Err(Error::InvalidPoint(format!(
                "{what}: vertex {i} expects {n} values, found {}",
                vs.len()
            )));
        }
        if let Some(v) = vs.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint(format!("{what}: non-finite value {v}")));
        }
    }
    Ok(())
}

/// A point `(w, y)` or `(w, z)` of an unreduced chart.
#[derive(Debug, Clone, PartialEq)]
pub struct UnreducedChartPoint {
    quiver: Quiver,
    alpha: Degree,
    kind: ChartKind,
    w: Vec<Vec<Complex64>>,
    fiber: Vec<Vec<Complex64>>,
    separation: f64,
}

impl UnreducedChartPoint {
    pub fn new(
        quiver: Quiver,
        alpha: Degree,
        kind: ChartKind,
        w: Vec<Vec<Complex64>>,
        fiber: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        alpha.check_matches(&quiver)?;
        let sizes = || alpha.coefficients().iter().map(|&a| a as usize);
        check_shape(&w, sizes(), "w")?;
        check_shape(&fiber, sizes(), "fiber")?;
        check_fibers(&fiber, "fiber")?;
        Ok(UnreducedChartPoint {
            quiver,
            alpha,
            kind,
            w,
            fiber,
            separation: DEFAULT_SEPARATION,
        })
    }

    pub fn with_separation(mut self, separation: f64) -> Self {
        self.separation = separation;
        self
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn alpha(&self) -> &Degree {
        &self.alpha
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn w(&self, i: usize) -> &[Complex64] {
        &self.w[i]
    }

    pub fn fiber(&self, i: usize) -> &[Complex64] {
        &self.fiber[i]
    }

    pub fn w_all(&self) -> &[Vec<Complex64>] {
        &self.w
    }

    pub fn fiber_all(&self) -> &[Vec<Complex64>] {
        &self.fiber
    }

    pub fn dim(&self) -> usize {
        2 * self.alpha.total() as usize
    }

    /// Position of `w_{i,r}` in the coordinate vector.
    pub fn w_slot(&self, i: usize, r: usize) -> usize {
        self.w[..i].iter().map(Vec::len).sum::<usize>() + r
    }

    /// Position of the fibre coordinate `(i, r)` in the coordinate vector.
    pub fn fiber_slot(&self, i: usize, r: usize) -> usize {
        self.alpha.total() as usize + self.w_slot(i, r)
    }

    pub fn labels(&self) -> Vec<CoordLabel> {
        let fiber_kind = match self.kind {
            ChartKind::Zastava => CoordKind::Y,
            ChartKind::Coulomb => CoordKind::Z,
        };
        let mut out = Vec::with_capacity(self.dim());
        for kind in [CoordKind::W, fiber_kind] {
            for (i, ws) in self.w.iter().enumerate() {
                out.extend((0..ws.len()).map(|r| CoordLabel {
                    kind,
                    vertex: i,
                    vertex_id: self.quiver.vertices()[i].clone(),
                    index: r,
                }));
            }
        }
        out
    }

    /// Coordinates ordered as all `w`, then all fibre values.
    pub fn coords(&self) -> Vec<Complex64> {
        self.w.iter().chain(&self.fiber).flatten().copied().collect()
    }

    pub fn with_coords(&self, x: &[Complex64]) -> Result<Self> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let half = self.dim() / 2;
        let split = |values: &[Complex64]| {
            let mut it = values.iter().copied();
            self.w
                .iter()
                .map(|ws| it.by_ref().take(ws.len()).collect())
                .collect::<Vec<Vec<_>>>()
        };
        let mut p = self.clone();
        p.w = split(&x[..half]);
        p.fiber = split(&x[half..]);
        check_fibers(&p.fiber, "fiber")?;
        Ok(p)
    }

    /// Pairwise separation of the points `w` (modulo the lattice when given).
    pub fn check_separation(&self, lattice: Option<&ModularParam>, cross_color_only: bool) -> Result<()> {
        check_points(&self.quiver, &self.w, self.separation, lattice, cross_color_only)
    }
}

/// A point of a reduced chart: free `w`, the fixed sums, and fibre ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedChartPoint {
    quiver: Quiver,
    alpha: Degree,
    kind: ChartKind,
    w_free: Vec<Vec<Complex64>>,
    sum_constraint: Vec<Complex64>,
    ratio: Vec<Vec<Complex64>>,
    separation: f64,
}

impl ReducedChartPoint {
    pub fn new(
        quiver: Quiver,
        alpha: Degree,
        kind: ChartKind,
        w_free: Vec<Vec<Complex64>>,
        sum_constraint: Vec<Complex64>,
        ratio: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        alpha.check_matches(&quiver)?;
        if !alpha.is_reduction_admissible() {
            return Err(Error::InvalidDegree(format!(
                "reduced charts need every coefficient positive, got {alpha}"
            )));
        }
        let sizes = || alpha.coefficients().iter().map(|&a| a as usize - 1);
        check_shape(&w_free, sizes(), "w_free")?;
        check_shape(&ratio, sizes(), "ratio")?;
        check_fibers(&ratio, "ratio")?;
        if sum_constraint.len() != quiver.rank() || sum_constraint.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("sum_constraint needs one finite value per vertex".into()));
        }
        Ok(ReducedChartPoint {
            quiver,
            alpha,
            kind,
            w_free,
            sum_constraint,
            ratio,
            separation: DEFAULT_SEPARATION,
        })
    }

    /// Builds the point from all `a_i` positions per color; the last one
    /// becomes the derived coordinate.
    pub fn from_full_w(
        quiver: Quiver,
        alpha: Degree,
        kind: ChartKind,
        w_full: Vec<Vec<Complex64>>,
        ratio: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        check_shape(&w_full, alpha.coefficients().iter().map(|&a| a as usize), "w")?;
        let sums = w_full.iter().map(|ws| order_free_sum(ws)).collect();
        let free = w_full
            .into_iter()
            .map(|mut ws| {
                ws.pop();
                ws
            })
            .collect();
        Self::new(quiver, alpha, kind, free, sums, ratio)
    }

    pub fn with_separation(mut self, separation: f64) -> Self {
        self.separation = separation;
        self
    }

    /// Same positions, new ratios of the given kind.
    pub fn with_ratios(&self, kind: ChartKind, ratio: Vec<Vec<Complex64>>) -> Result<Self> {
        check_shape(&ratio, self.w_free.iter().map(Vec::len), "ratio")?;
        check_fibers(&ratio, "ratio")?;
        let mut p = self.clone();
        p.kind = kind;
        p.ratio = ratio;
        Ok(p)
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn alpha(&self) -> &Degree {
        &self.alpha
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn w_free(&self, i: usize) -> &[Complex64] {
        &self.w_free[i]
    }

    pub fn ratio(&self, i: usize) -> &[Complex64] {
        &self.ratio[i]
    }

    pub fn ratios(&self) -> &[Vec<Complex64>] {
        &self.ratio
    }

    pub fn sum_constraint(&self) -> &[Complex64] {
        &self.sum_constraint
    }

    /// `w_{i,a_i} = c_i - sum_{r < a_i} w_{i,r}`.
    pub fn derived_w(&self, i: usize) -> Complex64 {
        self.sum_constraint[i] - order_free_sum(&self.w_free[i])
    }

    /// All `a_i` positions of color `i`, the derived one last.
    pub fn full_w(&self, i: usize) -> Vec<Complex64> {
        let mut ws = self.w_free[i].clone();
        ws.push(self.derived_w(i));
        ws
    }

    pub fn full_w_all(&self) -> Vec<Vec<Complex64>> {
        (0..self.quiver.rank()).map(|i| self.full_w(i)).collect()
    }

    /// Number of free coordinates, `2 sum (a_i - 1) = 2|alpha| - 2 rk`.
    pub fn dim(&self) -> usize {
        2 * (self.alpha.total() as usize - self.quiver.rank())
    }

    pub fn w_slot(&self, i: usize, r: usize) -> usize {
        self.w_free[..i].iter().map(Vec::len).sum::<usize>() + r
    }

    pub fn ratio_slot(&self, i: usize, r: usize) -> usize {
        self.dim() / 2 + self.w_slot(i, r)
    }

    pub fn labels(&self) -> Vec<CoordLabel> {
        let ratio_kind = match self.kind {
            ChartKind::Zastava => CoordKind::YRatio,
            ChartKind::Coulomb => CoordKind::ZRatio,
        };
        let mut out = Vec::with_capacity(self.dim());
        for kind in [CoordKind::W, ratio_kind] {
            for (i, ws) in self.w_free.iter().enumerate() {
                out.extend((0..ws.len()).map(|r| CoordLabel {
                    kind,
                    vertex: i,
                    vertex_id: self.quiver.vertices()[i].clone(),
                    index: r,
                }));
            }
        }
        out
    }

    /// Free coordinates: all `w_free`, then all ratios.
    pub fn coords(&self) -> Vec<Complex64> {
        self.w_free.iter().chain(&self.ratio).flatten().copied().collect()
    }

    pub fn with_coords(&self, x: &[Complex64]) -> Result<Self> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let half = self.dim() / 2;
        let split = |values: &[Complex64]| {
            let mut it = values.iter().copied();
            self.w_free
                .iter()
                .map(|ws| it.by_ref().take(ws.len()).collect())
                .collect::<Vec<Vec<_>>>()
        };
        let mut p = self.clone();
        p.w_free = split(&x[..half]);
        p.ratio = split(&x[half..]);
        check_fibers(&p.ratio, "ratio")?;
        Ok(p)
    }

    /// Pairwise separation of all positions, derived ones included.
    pub fn check_separation(&self, lattice: Option<&ModularParam>) -> Result<()> {
        check_points(&self.quiver, &self.full_w_all(), self.separation, lattice, false)
    }

    /// Restriction to the full subquiver on `keep` (positions and ratios of
    /// the other colors are dropped).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let quiver = self.quiver.restrict(keep)?;
        let alpha = Degree::new(keep.iter().map(|&k| self.alpha.get(k)).collect())?;
        let pick = |v: &[Vec<Complex64>]| keep.iter().map(|&k| v[k].clone()).collect();
        let sums = keep.iter().map(|&k| self.sum_constraint[k]).collect();
        Ok(ReducedChartPoint::new(quiver, alpha, self.kind, pick(&self.w_free), sums, pick(&self.ratio))?
            .with_separation(self.separation))
    }
}

/// Either kind of chart point.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartPoint {
    Unreduced(UnreducedChartPoint),
    Reduced(ReducedChartPoint),
}

impl ChartPoint {
    pub fn dim(&self) -> usize {
        match self {
            ChartPoint::Unreduced(p) => p.dim(),
            ChartPoint::Reduced(p) => p.dim(),
        }
    }

    pub fn coords(&self) -> Vec<Complex64> {
        match self {
            ChartPoint::Unreduced(p) => p.coords(),
            ChartPoint::Reduced(p) => p.coords(),
        }
    }

    pub fn labels(&self) -> Vec<CoordLabel> {
        match self {
            ChartPoint::Unreduced(p) => p.labels(),
            ChartPoint::Reduced(p) => p.labels(),
        }
    }

    pub fn quiver(&self) -> &Quiver {
        match self {
            ChartPoint::Unreduced(p) => p.quiver(),
            ChartPoint::Reduced(p) => p.quiver(),
        }
    }

    pub fn with_coords(&self, x: &[Complex64]) -> Result<Self> {
        Ok(match self {
            ChartPoint::Unreduced(p) => ChartPoint::Unreduced(p.with_coords(x)?),
            ChartPoint::Reduced(p) => ChartPoint::Reduced(p.with_coords(x)?),
        })
    }
}

impl From<UnreducedChartPoint> for ChartPoint {
    fn from(p: UnreducedChartPoint) -> Self {
        ChartPoint::Unreduced(p)
    }
}

impl From<ReducedChartPoint> for ChartPoint {
    fn from(p: ReducedChartPoint) -> Self {
        ChartPoint::Reduced(p)
    }
}
