use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChartKind, ChartPoint, CoordLabel, ReducedChartPoint, UnreducedChartPoint};
use crate::elliptic::{weierstrass_p, weierstrass_zeta, ModularParam};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Antisymmetric table of the pairwise brackets `m[a][b] = {x_a, x_b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketMatrix {
    labels: Vec<CoordLabel>,
    m: Vec<Complex64>,
}

impl BracketMatrix {
    pub fn new(labels: Vec<CoordLabel>, m: Vec<Complex64>) -> Result<Self> {
        let n = labels.len();
        if m.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: m.len(),
            });
        }
        Ok(BracketMatrix { labels, m })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[CoordLabel] {
        &self.labels
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.m[a * self.dim() + b]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.m
    }

    pub fn row(&self, a: usize) -> &[Complex64] {
        let n = self.dim();
        &self.m[a * n..(a + 1) * n]
    }

    /// Index of the coordinate whose label prints as `name`.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.to_string() == name)
    }

    /// Bracket of two coordinates by name.
    pub fn bracket(&self, a: &str, b: &str) -> Option<Complex64> {
        Some(self.get(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |m + m^T| / max |m|` (zero for the zero matrix).
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                worst = worst.max((self.get(a, b) + self.get(b, a)).norm());
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    pub fn submatrix(&self, keep: &[usize]) -> BracketMatrix {
        let labels = keep.iter().map(|&k| self.labels[k].clone()).collect();
        let m = keep
            .iter()
            .flat_map(|&a| keep.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.get(a, b))
            .collect();
        BracketMatrix { labels, m }
    }

    /// `J M J^T` for an antisymmetric `M` and a square Jacobian `J` given
    /// row-major, evaluated as the pushforward of a bivector:
    /// `sum_{c<d} M_cd (J_ac J_bd - J_ad J_bc)`.
    pub fn congruence(&self, jacobian: &[Complex64], labels: Vec<CoordLabel>) -> Result<BracketMatrix> {
        let n = self.dim();
        if jacobian.len() != n * n || labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: jacobian.len(),
            });
        }
        let pairs: Vec<(usize, usize, Complex64)> = (0..n)
            .flat_map(|c| (c + 1..n).map(move |d| (c, d)))
            .map(|(c, d)| (c, d, self.get(c, d)))
            .filter(|&(_, _, v)| v != ZERO)
            .collect();
        let mut out = vec![ZERO; n * n];
        for a in 0..n {
            for b in a + 1..n {
                let (ja, jb) = (&jacobian[a * n..(a + 1) * n], &jacobian[b * n..(b + 1) * n]);
                let v: Complex64 = pairs
                    .iter()
                    .map(|&(c, d, m)| m * (ja[c] * jb[d] - ja[d] * jb[c]))
                    .sum();
                out[a * n + b] = v;
                out[b * n + a] = -v;
            }
        }
        BracketMatrix::new(labels, out)
    }
}

/// Bracket values together with their derivatives along every coordinate.
#[derive(Debug, Clone)]
pub struct BracketField {
    matrix: BracketMatrix,
    /// `gradient[(a * n + b) * n + d] = d {x_a, x_b} / d x_d`.
    gradient: Vec<Complex64>,
}

impl BracketField {
    pub fn matrix(&self) -> &BracketMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> BracketMatrix {
        self.matrix
    }

    pub fn derivative(&self, a: usize, b: usize, d: usize) -> Complex64 {
        let n = self.matrix.dim();
        self.gradient[(a * n + b) * n + d]
    }

    /// `{x_a, {x_b, x_c}} + {x_b, {x_c, x_a}} + {x_c, {x_a, x_b}}` in closed form.
    pub fn jacobiator(&self, a: usize, b: usize, c: usize) -> Complex64 {
        let n = self.matrix.dim();
        let term = |f: usize, g: usize, h: usize| -> Complex64 {
            (0..n)
                .map(|d| self.matrix.get(f, d) * self.derivative(g, h, d))
                .sum()
        };
        term(a, b, c) + term(b, c, a) + term(c, a, b)
    }

    /// Largest Jacobiator modulus over all triples `a < b < c`, with the triple.
    pub fn max_jacobiator(&self) -> (f64, Option<(usize, usize, usize)>) {
        let n = self.matrix.dim();
        let mut best = (0.0, None);
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let r = self.jacobiator(a, b, c).norm();
                    if r > best.0 || best.1.is_none() {
                        best = (r, Some((a, b, c)));
                    }
                }
            }
        }
        best
    }
}

/// The chart bracket families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum BracketFamily {
    /// `{w, y} = y`, `{y_i, y_j} = (alpha_i, alpha_j) y_i y_j / (w_i - w_j)` on
    /// an unreduced zastava chart over the affine line.
    Rational,
    /// The log-canonical bracket `{z_{i,r}, w_{i,r}} = z_{i,r}` on an unreduced
    /// Coulomb chart.
    Coulomb,
    /// The reduced elliptic bracket in Weierstrass-zeta form.
    EllipticFo { mp: ModularParam },
    /// Hamiltonian reduction of [`BracketFamily::Coulomb`].
    CoulombReduced,
}

impl BracketFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BracketFamily::Rational => "rational",
            BracketFamily::Coulomb => "coulomb",
            BracketFamily::EllipticFo { .. } => "elliptic_fo",
            BracketFamily::CoulombReduced => "coulomb_reduced",
        }
    }

    /// Lattice used to measure separation of chart points, if any.
    pub fn lattice(&self) -> Option<&ModularParam> {
        match self {
            BracketFamily::EllipticFo { mp } => Some(mp),
            _ => None,
        }
    }
}

struct FieldBuilder {
    n: usize,
    m: Vec<Complex64>,
    gradient: Option<Vec<Complex64>>,
}

impl FieldBuilder {
    fn new(n: usize, with_gradient: bool) -> Self {
        FieldBuilder {
            n,
            m: vec![ZERO; n * n],
            gradient: with_gradient.then(|| vec![ZERO; n * n * n]),
        }
    }

    fn wants_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// Sets `{x_a, x_b} = value` and its mirror, with sparse derivatives.
    fn set(&mut self, a: usize, b: usize, value: Complex64, grad: &[(usize, Complex64)]) {
        let n = self.n;
        self.m[a * n + b] = value;
        self.m[b * n + a] = -value;
        if let Some(g) = self.gradient.as_mut() {
            for &(d, v) in grad {
                g[(a * n + b) * n + d] += v;
                g[(b * n + a) * n + d] -= v;
            }
        }
    }

    fn finish(self, labels: Vec<CoordLabel>) -> BracketField {
        let n = self.n;
        BracketField {
            matrix: BracketMatrix { labels, m: self.m },
            gradient: self.gradient.unwrap_or_else(|| vec![ZERO; n * n * n]),
        }
    }
}

fn expect_kind(found: ChartKind, expected: ChartKind) -> Result<()> {
    if found != expected {
        return Err(Error::ChartKindMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

fn rational_field(p: &UnreducedChartPoint, with_gradient: bool) -> Result<BracketField> {
    expect_kind(p.kind(), ChartKind::Zastava)?;
    p.check_separation(None, true)?;
    let q = p.quiver();
    let mut fb = FieldBuilder::new(p.dim(), with_gradient);
    for i in 0..q.rank() {
        for (r, &y) in p.fiber(i).iter().enumerate() {
            // d_i = 1 in the simply-laced case.
            fb.set(p.w_slot(i, r), p.fiber_slot(i, r), y, &[(p.fiber_slot(i, r), ONE)]);
        }
    }
    for i in 0..q.rank() {
        for j in i + 1..q.rank() {
            let pairing = q.cartan_entry(i, j);
            if pairing == 0 {
                continue;
            }
            let c = pairing as f64;
            for (r, (&wi, &yi)) in p.w(i).iter().zip(p.fiber(i)).enumerate() {
                for (s, (&wj, &yj)) in p.w(j).iter().zip(p.fiber(j)).enumerate() {
                    let inv = (wi - wj).inv();
                    let value = c * (yi * yj) * inv;
                    let grad = if fb.wants_gradient() {
                        vec![
                            (p.fiber_slot(i, r), c * yj * inv),
                            (p.fiber_slot(j, s), c * yi * inv),
                            (p.w_slot(i, r), -value * inv),
                            (p.w_slot(j, s), value * inv),
                        ]
                    } else {
                        Vec::new()
                    };
                    fb.set(p.fiber_slot(i, r), p.fiber_slot(j, s), value, &grad);
                }
            }
        }
    }
    Ok(fb.finish(p.labels()))
}

fn coulomb_field(p: &UnreducedChartPoint, with_gradient: bool) -> Result<BracketField> {
    expect_kind(p.kind(), ChartKind::Coulomb)?;
    let mut fb = FieldBuilder::new(p.dim(), with_gradient);
    for i in 0..p.quiver().rank() {
        for (r, &z) in p.fiber(i).iter().enumerate() {
            fb.set(p.fiber_slot(i, r), p.w_slot(i, r), z, &[(p.fiber_slot(i, r), ONE)]);
        }
    }
    Ok(fb.finish(p.labels()))
}

/// `{ratio_{i,r}, w_{i,r}} = ratio_{i,r}`, shared by both reduced brackets.
fn reduced_moment_part(p: &ReducedChartPoint, fb: &mut FieldBuilder) {
    for i in 0..p.quiver().rank() {
        for (r, &v) in p.ratio(i).iter().enumerate() {
            fb.set(p.ratio_slot(i, r), p.w_slot(i, r), v, &[(p.ratio_slot(i, r), ONE)]);
        }
    }
}

fn coulomb_reduced_field(p: &ReducedChartPoint, with_gradient: bool) -> Result<BracketField> {
    expect_kind(p.kind(), ChartKind::Coulomb)?;
    let mut fb = FieldBuilder::new(p.dim(), with_gradient);
    reduced_moment_part(p, &mut fb);
    Ok(fb.finish(p.labels()))
}

/// Adds `g * d/dw_{i,t}` to a free-coordinate gradient, expanding the derived
/// position `w_{i,a_i} = c_i - sum w_free` by the chain rule.
pub(crate) fn push_w_derivative(
    p: &ReducedChartPoint,
    i: usize,
    t: usize,
    g: Complex64,
    out: &mut Vec<(usize, Complex64)>,
) {
    let free = p.w_free(i).len();
    if t < free {
        out.push((p.w_slot(i, t), g));
    } else {
        out.extend((0..free).map(|s| (p.w_slot(i, s), -g)));
    }
}

struct ZetaCache<'a> {
    mp: &'a ModularParam,
    values: HashMap<(usize, usize, usize, usize), (Complex64, Complex64)>,
}

impl ZetaCache<'_> {
    /// `(zeta, wp)` at `w_{i,r} - w_{j,s}`.
    fn get(&mut self, w: &[Vec<Complex64>], key: (usize, usize, usize, usize)) -> Result<(Complex64, Complex64)> {
        if let Some(v) = self.values.get(&key) {
            return Ok(*v);
        }
        let (i, r, j, s) = key;
        let x = w[i][r] - w[j][s];
        let v = (weierstrass_zeta(x, self.mp)?, weierstrass_p(x, self.mp)?);
        self.values.insert(key, v);
        Ok(v)
    }
}

fn fo_field(p: &ReducedChartPoint, mp: &ModularParam, with_gradient: bool) -> Result<BracketField> {
    expect_kind(p.kind(), ChartKind::Zastava)?;
    p.check_separation(Some(mp))?;
    let q = p.quiver();
    let w = p.full_w_all();
    let mut fb = FieldBuilder::new(p.dim(), with_gradient);
    reduced_moment_part(p, &mut fb);
    let mut cache = ZetaCache {
        mp,
        values: HashMap::new(),
    };
    for i in 0..q.rank() {
        for j in i + 1..q.rank() {
            if !q.adjacent(i, j) {
                continue;
            }
            let (ai, aj) = (w[i].len() - 1, w[j].len() - 1);
            for (r, &yi) in p.ratio(i).iter().enumerate() {
                for (s, &yj) in p.ratio(j).iter().enumerate() {
                    let (z1, p1) = cache.get(&w, (i, r, j, s))?;
                    let (z2, p2) = cache.get(&w, (i, r, j, aj))?;
                    let (z3, p3) = cache.get(&w, (i, ai, j, s))?;
                    let (z4, p4) = cache.get(&w, (i, ai, j, aj))?;
                    let comb = z1 - z2 - z3 + z4;
                    let yy = yi * yj;
                    let mut grad = Vec::new();
                    if fb.wants_gradient() {
                        grad.push((p.ratio_slot(i, r), yj * comb));
                        grad.push((p.ratio_slot(j, s), yi * comb));
                        push_w_derivative(p, i, r, yy * (p2 - p1), &mut grad);
                        push_w_derivative(p, i, ai, yy * (p3 - p4), &mut grad);
                        push_w_derivative(p, j, s, yy * (p1 - p3), &mut grad);
                        push_w_derivative(p, j, aj, yy * (p4 - p2), &mut grad);
                    }
                    fb.set(p.ratio_slot(i, r), p.ratio_slot(j, s), yy * comb, &grad);
                }
            }
        }
    }
    Ok(fb.finish(p.labels()))
}

fn family_mismatch(family: &BracketFamily, wanted: &str) -> Error {
    Error::InvalidPoint(format!("the {} bracket needs a {wanted} chart point", family.name()))
}

/// Bracket values and their derivatives for a family at a point.
pub fn bracket_field(family: &BracketFamily, point: &ChartPoint) -> Result<BracketField> {
    field(family, point, true)
}

fn field(family: &BracketFamily, point: &ChartPoint, with_gradient: bool) -> Result<BracketField> {
    match (family, point) {
        (BracketFamily::Rational, ChartPoint::Unreduced(p)) => rational_field(p, with_gradient),
        (BracketFamily::Coulomb, ChartPoint::Unreduced(p)) => coulomb_field(p, with_gradient),
        (BracketFamily::EllipticFo { mp }, ChartPoint::Reduced(p)) => fo_field(p, mp, with_gradient),
        (BracketFamily::CoulombReduced, ChartPoint::Reduced(p)) => coulomb_reduced_field(p, with_gradient),
        (BracketFamily::Rational | BracketFamily::Coulomb, _) => Err(family_mismatch(family, "unreduced")),
        _ => Err(family_mismatch(family, "reduced")),
    }
}

pub(crate) fn bracket_matrix(family: &BracketFamily, point: &ChartPoint) -> Result<BracketMatrix> {
    Ok(field(family, point, false)?.into_matrix())
}

/// Rational zastava bracket over the coordinates `(w..., y...)`.
pub fn rational_bracket_matrix(p: &UnreducedChartPoint) -> Result<BracketMatrix> {
    Ok(rational_field(p, false)?.into_matrix())
}

/// Log-canonical Coulomb bracket over `(w..., z...)`.
pub fn coulomb_bracket_matrix(p: &UnreducedChartPoint) -> Result<BracketMatrix> {
    Ok(coulomb_field(p, false)?.into_matrix())
}

/// Reduced elliptic bracket over `(w_free..., Y...)`.
pub fn fo_reduced_bracket_matrix(p: &ReducedChartPoint, mp: &ModularParam) -> Result<BracketMatrix> {
    Ok(fo_field(p, mp, false)?.into_matrix())
}

/// Reduced Coulomb bracket over `(w_free..., Z...)`.
pub fn coulomb_reduced_bracket_matrix(p: &ReducedChartPoint) -> Result<BracketMatrix> {
    Ok(coulomb_reduced_field(p, false)?.into_matrix())
}

/// Cyclic sum `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` for three coordinates,
/// evaluated with closed-form derivatives of the structure functions.
pub fn jacobiator_residual(
    family: &BracketFamily,
    point: &ChartPoint,
    triple: (usize, usize, usize),
) -> Result<Complex64> {
    let n = point.dim();
    for k in [triple.0, triple.1, triple.2] {
        if k >= n {
            return Err(Error::DimensionMismatch { expected: n, found: k });
        }
    }
    Ok(bracket_field(family, point)?.jacobiator(triple.0, triple.1, triple.2))
}

/// `X_H = M . grad H`, i.e. `(X_H)_a = {x_a, H}`.
pub fn hamiltonian_vector_field(bm: &BracketMatrix, grad_h: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = bm.dim();
    if grad_h.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: grad_h.len(),
        });
    }
    Ok((0..n)
        .map(|a| bm.row(a).iter().zip(grad_h).map(|(m, g)| m * g).sum())
        .collect())
}
