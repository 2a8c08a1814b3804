//! The theta-product change of coordinates between the reduced Coulomb chart
//! and the reduced elliptic zastava chart, and the degenerations and residue
//! coordinates built on the same special functions.
//!
//! With positions fixed, the ratios transform as
//!
//! ```text
//! Y_{i,r} = Z_{i,r} * (phi_{i,r} psi_{i,r}) / (phi_{i,a_i} psi_{i,a_i}),
//! psi_{i,r} = prod_{h : i -> j} prod_{t=1}^{a_j} theta(w_{i,r} - w_{j,t}),
//! ```
//!
//! so the theta product sits on the source color of every arrow. The gauge
//! factors `phi` only depend on positions of their own color; the unit gauge
//! is the default.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::charts::{
    coulomb_reduced_bracket_matrix, BracketMatrix, ChartKind, CoordKind, CoordLabel, ReducedChartPoint,
};
use crate::elliptic::{lattice_distance, theta, theta_log_deriv, weierstrass_zeta, ModularParam, POLE_THRESHOLD};
use crate::error::{Error, Result};
use crate::quiver::{Degree, Quiver};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A per-color gauge `phi_{i,r}(w_{i,1}, ..., w_{i,a_i})`, given through its
/// logarithm.
///
/// The log-derivatives must be symmetric,
/// `d log phi_{i,s} / d w_{i,r} = d log phi_{i,r} / d w_{i,s}`.
pub trait GaugePotential: Send + Sync {
    fn log_phi(&self, vertex: usize, r: usize, w: &[Complex64]) -> Complex64;

    /// `d log phi_{i,r} / d w_{i,s}` for every `s`.
    fn log_phi_gradient(&self, vertex: usize, r: usize, w: &[Complex64]) -> Vec<Complex64>;
}

/// `phi_{i,r} = exp(kappa * w_{i,r}^2)`, a simple symmetric gauge.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticGauge {
    pub kappa: Complex64,
}

impl GaugePotential for QuadraticGauge {
    fn log_phi(&self, _vertex: usize, r: usize, w: &[Complex64]) -> Complex64 {
        self.kappa * w[r] * w[r]
    }

    fn log_phi_gradient(&self, _vertex: usize, r: usize, w: &[Complex64]) -> Vec<Complex64> {
        let mut g = vec![ZERO; w.len()];
        g[r] = 2.0 * self.kappa * w[r];
        g
    }
}

#[derive(Clone, Default)]
pub enum PhiGauge {
    #[default]
    Unit,
    Custom(Arc<dyn GaugePotential>),
}

impl fmt::Debug for PhiGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiGauge::Unit => f.write_str("Unit"),
            PhiGauge::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Data of the coordinate transform.
#[derive(Debug, Clone)]
pub struct TransformSpec {
    pub quiver: Quiver,
    pub alpha: Degree,
    pub mp: ModularParam,
    pub gauge: PhiGauge,
}

impl TransformSpec {
    pub fn new(quiver: Quiver, alpha: Degree, mp: ModularParam) -> Result<Self> {
        alpha.check_matches(&quiver)?;
        if !alpha.is_reduction_admissible() {
            return Err(Error::InvalidDegree(format!(
                "the transform needs every coefficient positive, got {alpha}"
            )));
        }
        Ok(TransformSpec {
            quiver,
            alpha,
            mp,
            gauge: PhiGauge::Unit,
        })
    }

    pub fn with_gauge(mut self, gauge: PhiGauge) -> Self {
        self.gauge = gauge;
        self
    }

    fn check_point(&self, p: &ReducedChartPoint) -> Result<()> {
        if p.quiver() != &self.quiver || p.alpha() != &self.alpha {
            return Err(Error::InvalidPoint("point does not match the transform's quiver and degree".into()));
        }
        Ok(())
    }

    /// Checks the symmetry of the gauge log-derivatives at `p`.
    pub fn check_gauge(&self, p: &ReducedChartPoint) -> Result<()> {
        let PhiGauge::Custom(g) = &self.gauge else {
            return Ok(());
        };
        for i in 0..self.quiver.rank() {
            let w = p.full_w(i);
            let grads: Vec<Vec<Complex64>> = (0..w.len()).map(|r| g.log_phi_gradient(i, r, &w)).collect();
            for (r, row) in grads.iter().enumerate() {
                for (s, column) in grads.iter().enumerate().take(r) {
                    let a = row[s];
                    let b = column[r];
                    let asymmetry = (a - b).norm();
                    if asymmetry > 1e-10 * (1.0 + a.norm().max(b.norm())) {
                        return Err(Error::GaugeNotSymmetric { vertex: i, asymmetry });
                    }
                }
            }
        }
        Ok(())
    }

    fn theta_checked(&self, x: Complex64) -> Result<Complex64> {
        if lattice_distance(x, &self.mp) < POLE_THRESHOLD {
            return Err(Error::ThetaZero { re: x.re, im: x.im });
        }
        Ok(theta(x, &self.mp))
    }

    fn log_deriv_checked(&self, x: Complex64) -> Result<Complex64> {
        theta_log_deriv(x, &self.mp).map_err(|_| Error::ThetaZero { re: x.re, im: x.im })
    }
}

/// `psi_{i,r} = prod over arrows i -> j, t = 1..a_j of theta(w_{i,r} - w_{j,t})`,
/// derived positions included. `r` is zero-based and may be the derived index.
pub fn psi_factor(spec: &TransformSpec, i: usize, r: usize, p: &ReducedChartPoint) -> Result<Complex64> {
    spec.check_point(p)?;
    if i >= spec.quiver.rank() || r >= spec.alpha.get(i) as usize {
        return Err(Error::InvalidArgument(format!("no coordinate ({i}, {r}) on this chart")));
    }
    let wi = p.full_w(i)[r];
    let mut acc = Complex64::new(1.0, 0.0);
    for j in spec.quiver.outgoing(i) {
        for wj in p.full_w(j) {
            acc *= spec.theta_checked(wi - wj)?;
        }
    }
    Ok(acc)
}

/// Log of the ratio factor `F_{i,r} = phi_{i,r} psi_{i,r} / (phi_{i,a} psi_{i,a})`,
/// as a value and as a gradient over the full positions of every color.
struct RatioFactor {
    value: Complex64,
    /// `(vertex, index, d log F / d w_{vertex,index})`.
    log_gradient: Vec<(usize, usize, Complex64)>,
}

fn ratio_factor(spec: &TransformSpec, p: &ReducedChartPoint, i: usize, r: usize, with_gradient: bool) -> Result<RatioFactor> {
    let full: Vec<Vec<Complex64>> = p.full_w_all();
    let last = full[i].len() - 1;
    let mut value = psi_factor(spec, i, r, p)? / psi_factor(spec, i, last, p)?;
    let mut log_gradient = Vec::new();
    if with_gradient {
        for (sign, idx) in [(1.0, r), (-1.0, last)] {
            let wi = full[i][idx];
            for j in spec.quiver.outgoing(i) {
                for (t, &wj) in full[j].iter().enumerate() {
                    let g = sign * spec.log_deriv_checked(wi - wj)?;
                    log_gradient.push((i, idx, g));
                    log_gradient.push((j, t, -g));
                }
            }
        }
    }
    if let PhiGauge::Custom(g) = &spec.gauge {
        let w = &full[i];
        value *= (g.log_phi(i, r, w) - g.log_phi(i, last, w)).exp();
        if with_gradient {
            let (gr, ga) = (g.log_phi_gradient(i, r, w), g.log_phi_gradient(i, last, w));
            for s in 0..w.len() {
                log_gradient.push((i, s, gr[s] - ga[s]));
            }
        }
    }
    Ok(RatioFactor { value, log_gradient })
}

fn transform_ratios(spec: &TransformSpec, p: &ReducedChartPoint, forward: bool) -> Result<Vec<Vec<Complex64>>> {
    (0..spec.quiver.rank())
        .map(|i| {
            p.ratio(i)
                .iter()
                .enumerate()
                .map(|(r, &v)| {
                    let f = ratio_factor(spec, p, i, r, false)?.value;
                    Ok(if forward { v * f } else { v / f })
                })
                .collect()
        })
        .collect()
}

/// Coulomb ratios `Z` to zastava ratios `Y`, positions unchanged.
pub fn zastava_from_coulomb(spec: &TransformSpec, p: &ReducedChartPoint) -> Result<ReducedChartPoint> {
    spec.check_point(p)?;
    if p.kind() != ChartKind::Coulomb {
        return Err(Error::ChartKindMismatch {
            expected: ChartKind::Coulomb.to_string(),
            found: p.kind().to_string(),
        });
    }
    spec.check_gauge(p)?;
    p.with_ratios(ChartKind::Zastava, transform_ratios(spec, p, true)?)
}

/// Inverse of [`zastava_from_coulomb`].
pub fn coulomb_from_zastava(spec: &TransformSpec, p: &ReducedChartPoint) -> Result<ReducedChartPoint> {
    spec.check_point(p)?;
    if p.kind() != ChartKind::Zastava {
        return Err(Error::ChartKindMismatch {
            expected: ChartKind::Zastava.to_string(),
            found: p.kind().to_string(),
        });
    }
    spec.check_gauge(p)?;
    p.with_ratios(ChartKind::Coulomb, transform_ratios(spec, p, false)?)
}

/// Analytic Jacobian of [`zastava_from_coulomb`] at a Coulomb point, rows
/// `(w_free, Y)` and columns `(w_free, Z)`, row-major.
pub fn transform_jacobian(spec: &TransformSpec, p: &ReducedChartPoint) -> Result<Vec<Complex64>> {
    spec.check_point(p)?;
    spec.check_gauge(p)?;
    let n = p.dim();
    let half = n / 2;
    let mut jac = vec![ZERO; n * n];
    for k in 0..half {
        jac[k * n + k] = Complex64::new(1.0, 0.0);
    }
    for i in 0..spec.quiver.rank() {
        for (r, &z) in p.ratio(i).iter().enumerate() {
            let row = p.ratio_slot(i, r);
            let factor = ratio_factor(spec, p, i, r, true)?;
            let y = z * factor.value;
            jac[row * n + row] = factor.value;
            for (j, t, g) in factor.log_gradient {
                let mut cols = Vec::new();
                crate::charts::push_w_derivative(p, j, t, g, &mut cols);
                for (col, v) in cols {
                    jac[row * n + col] += y * v;
                }
            }
        }
    }
    Ok(jac)
}

/// The reduced Coulomb bracket pushed through the transform: `J B J^T`, with
/// the zastava labels of the image chart.
pub fn pushforward_bracket(spec: &TransformSpec, p: &ReducedChartPoint) -> Result<BracketMatrix> {
    spec.check_point(p)?;
    p.check_separation(Some(&spec.mp))?;
    let b = coulomb_reduced_bracket_matrix(p)?;
    let jac = transform_jacobian(spec, p)?;
    let labels = p
        .labels()
        .into_iter()
        .map(|l| CoordLabel {
            kind: if l.kind == CoordKind::ZRatio { CoordKind::YRatio } else { l.kind },
            ..l
        })
        .collect();
    b.congruence(&jac, labels)
}

/// Four positions entering one alternating combination:
/// `f(a - b) - f(a - b_ref) - f(a_ref - b) + f(a_ref - b_ref)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourPointConfig {
    #[serde(serialize_with = "crate::verify::serialize_complex")]
    pub a: Complex64,
    #[serde(serialize_with = "crate::verify::serialize_complex")]
    pub a_ref: Complex64,
    #[serde(serialize_with = "crate::verify::serialize_complex")]
    pub b: Complex64,
    #[serde(serialize_with = "crate::verify::serialize_complex")]
    pub b_ref: Complex64,
}

impl FourPointConfig {
    pub fn combination<F>(&self, mut f: F) -> Result<Complex64>
    where
        F: FnMut(Complex64) -> Result<Complex64>,
    {
        Ok(f(self.a - self.b)? - f(self.a - self.b_ref)? - f(self.a_ref - self.b)? + f(self.a_ref - self.b_ref)?)
    }

    pub fn scaled(&self, eps: f64) -> Self {
        FourPointConfig {
            a: eps * self.a,
            a_ref: eps * self.a_ref,
            b: eps * self.b,
            b_ref: eps * self.b_ref,
        }
    }
}

/// Four-term zeta combination of the reduced elliptic bracket.
pub fn zeta_combination(config: &FourPointConfig, mp: &ModularParam) -> Result<Complex64> {
    config.combination(|x| weierstrass_zeta(x, mp))
}

/// The same combination of `1/x`.
pub fn rational_combination(config: &FourPointConfig) -> Result<Complex64> {
    config.combination(|x| {
        if x.norm() < POLE_THRESHOLD {
            return Err(Error::PoleAtLatticePoint {
                re: x.re,
                im: x.im,
                modulus: x.norm(),
            });
        }
        Ok(x.inv())
    })
}

/// The same combination of `pi cot(pi x)`. The linear parts of zeta cancel in
/// the alternating sum, so this is the `q -> 0` limit of [`zeta_combination`].
pub fn trigonometric_combination(config: &FourPointConfig) -> Result<Complex64> {
    config.combination(|x| {
        let s = (PI * x).sin();
        if s.norm() < POLE_THRESHOLD {
            return Err(Error::PoleAtLatticePoint {
                re: x.re,
                im: x.im,
                modulus: s.norm(),
            });
        }
        Ok(PI * (PI * x).cos() / s)
    })
}

/// Errors along a degeneration ladder with the observed convergence orders.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// `"rational"` or `"trigonometric"`.
    pub limit: String,
    /// Ladder parameter: `eps` for the rational limit, `Im tau` for the
    /// trigonometric one.
    pub ladder: Vec<f64>,
    pub errors: Vec<f64>,
    /// Rational: `log(e_k / e_{k+1}) / log(eps_k / eps_{k+1})`.
    /// Trigonometric: `(e_k / e_{k+1}) / (|q_k| / |q_{k+1}|)`.
    pub rates: Vec<f64>,
    /// `|q|` per rung (trigonometric only).
    pub nome_moduli: Vec<f64>,
}

/// `eps * C_zeta(eps w) - C_rat(w)` along `ladder`; the expected order is four
/// because `zeta(x) - 1/x = O(x^3)`.
pub fn rational_limit_check(mp: &ModularParam, config: &FourPointConfig, ladder: &[f64]) -> Result<ConvergenceReport> {
    let target = rational_combination(config)?;
    let errors = ladder
        .iter()
        .map(|&eps| Ok((eps * zeta_combination(&config.scaled(eps), mp)? - target).norm()))
        .collect::<Result<Vec<f64>>>()?;
    let rates = errors
        .windows(2)
        .zip(ladder.windows(2))
        .map(|(e, l)| (e[0] / e[1]).ln() / (l[0] / l[1]).ln())
        .collect();
    Ok(ConvergenceReport {
        limit: "rational".into(),
        ladder: ladder.to_vec(),
        errors,
        rates,
        nome_moduli: Vec::new(),
    })
}

/// Zeta combination at `tau = re_tau + i * im` for each `im` in the ladder,
/// against the cotangent combination. The error should scale like `|q|`.
pub fn trigonometric_limit_check(config: &FourPointConfig, re_tau: f64, ladder: &[f64]) -> Result<ConvergenceReport> {
    let target = trigonometric_combination(config)?;
    let mut errors = Vec::with_capacity(ladder.len());
    let mut nome_moduli = Vec::with_capacity(ladder.len());
    for &im in ladder {
        let mp = ModularParam::new(Complex64::new(re_tau, im))?;
        errors.push((zeta_combination(config, &mp)? - target).norm());
        nome_moduli.push(mp.q().norm());
    }
    let rates = errors
        .windows(2)
        .zip(nome_moduli.windows(2))
        .map(|(e, q)| (e[0] / e[1]) / (q[0] / q[1]))
        .collect();
    Ok(ConvergenceReport {
        limit: "trigonometric".into(),
        ladder: ladder.to_vec(),
        errors,
        rates,
        nome_moduli,
    })
}

/// Quadrature settings for [`sl2_residue_coordinates`].
#[derive(Debug, Clone, Copy)]
pub struct ContourOptions {
    pub nodes: usize,
    /// Minimal pole separation; the contour radius is `min(separation / 2, 0.05)`.
    pub separation: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions {
            nodes: 64,
            separation: crate::charts::DEFAULT_SEPARATION,
        }
    }
}

impl ContourOptions {
    pub fn radius(&self) -> f64 {
        (self.separation / 2.0).min(0.05)
    }
}

/// Evaluates `t(x) = sum_r c_r zeta(x - w_r)`; elliptic when `sum c_r = 0`.
pub fn zeta_divisor_function(poles: &[Complex64], residues: &[Complex64], x: Complex64, mp: &ModularParam) -> Result<Complex64> {
    poles
        .iter()
        .zip(residues)
        .map(|(&w, &c)| Ok(c * weierstrass_zeta(x - w, mp)?))
        .sum()
}

/// Recovers the residues of `t(x) = sum_r c_r zeta(x - w_r)` at each pole by
/// trapezoidal quadrature of `(1 / 2 pi i) oint t(x) dx` on a small circle.
///
/// These are the homogeneous coordinates `(1 : Res_{w_r} t)` of the point
/// described by `t`.
pub fn sl2_residue_coordinates(
    poles: &[Complex64],
    residues: &[Complex64],
    mp: &ModularParam,
    options: &ContourOptions,
) -> Result<Vec<Complex64>> {
    if poles.len() != residues.len() {
        return Err(Error::DimensionMismatch {
            expected: poles.len(),
            found: residues.len(),
        });
    }
    if options.nodes < 2 {
        return Err(Error::InvalidArgument("quadrature needs at least two nodes".into()));
    }
    let total: Complex64 = residues.iter().sum();
    let scale = residues.iter().map(|c| c.norm()).fold(1.0, f64::max);
    if total.norm() > 1e-12 * scale {
        return Err(Error::ResiduesNotBalanced(total.norm()));
    }
    let radius = options.radius();
    for (k, &a) in poles.iter().enumerate() {
        for (l, &b) in poles.iter().enumerate().skip(k + 1) {
            let distance = lattice_distance(a - b, mp);
            // poles exactly two radii apart are accepted despite rounding
            if distance < 2.0 * radius * (1.0 - 1e-9) {
                return Err(Error::ContourTooClose {
                    pole: k,
                    other: l,
                    radius,
                    distance,
                });
            }
        }
    }
    let m = options.nodes;
    poles
        .iter()
        .map(|&w0| {
            let mut acc = ZERO;
            for k in 0..m {
                let arg = 2.0 * PI * k as f64 / m as f64;
                let offset = Complex64::from_polar(radius, arg);
                acc += zeta_divisor_function(poles, residues, w0 + offset, mp)? * offset;
            }
            Ok(acc / m as f64)
        })
        .collect()
}
