use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{RunConfig, Suite};
use super::report::{Bound, Check, FailureRecord, SuiteReport, VerificationReport, MAX_FAILURE_RECORDS};
use super::sampling::{sample_four_points, sample_positions, sample_ratio, sample_rng, sample_w};
use super::{complex_json, complex_rows_json};
use crate::charts::{
    bracket_field, coulomb_bracket_matrix, coulomb_reduced_bracket_matrix, flow_integrate, fo_reduced_bracket_matrix,
    rational_bracket_matrix, BracketFamily, BracketMatrix, ChartKind, ChartPoint, Hamiltonian, ReducedChartPoint,
    UnreducedChartPoint,
};
use crate::elliptic::{
    lattice_distance, quasi_periods, weierstrass_p, weierstrass_zeta, zeta_lattice_oracle,
    zeta_lattice_oracle_extrapolated, zeta_lattice_truncation_bound, ModularParam,
};
use crate::error::{Error, Result};
use crate::local::{a2_local_model, mirkovic_summand_rank, segre_embed, segre_residual, SegreVector};
use crate::quiver::{enumerate_subdegrees, Degree, Quiver};
use crate::transform::{
    pushforward_bracket, rational_combination, rational_limit_check, sl2_residue_coordinates, trigonometric_limit_check,
    zastava_from_coulomb, ContourOptions, PhiGauge, QuadraticGauge, TransformSpec,
};

/// Antisymmetry bound on every bracket matrix.
const ANTISYMMETRY_TOL: f64 = 1e-12;
/// Step and bound for the finite-difference check of `zeta' = -wp`.
const DERIVATIVE_STEP: f64 = 1e-4;
const DERIVATIVE_TOL: f64 = 1e-6;
/// Lattice-sum cutoff and bound for the oracle comparison.
const ORACLE_CUTOFF: usize = 500;
const ORACLE_TOL: f64 = 1e-7;
/// Distance kept from lattice points when sampling single arguments. The
/// central difference has relative error about `(h / |w|)^2` near a pole.
const POLE_MARGIN: f64 = 0.1;
const RATIONAL_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
const RATIONAL_MIN_ORDER: f64 = 3.5;
/// Relative rounding level of the rational-limit errors.
const RATIONAL_NOISE: f64 = 1e-13;
const TRIG_LADDER: [f64; 3] = [1.5, 2.0, 4.0];
const TRIG_RATE_FACTOR: f64 = 3.0;
const TRIG_FAR_TOL: f64 = 1e-9;
const MAX_RANK_TOTAL: u32 = 12;
const MAX_SEGRE_FACTORS: u32 = 10;
const SEGRE_PERTURBATION: f64 = 1e-6;
const NEAR_DIAGONAL: f64 = 1e-6;
const NEAR_DIAGONAL_TOL: f64 = 1e-6;
const FLOW_TOL: f64 = 1e-8;
const FLOW_STEPS: usize = 1000;
const CHART_FLOW_STEPS: usize = 20;
const RESIDUE_NODES: usize = 64;
const RESIDUE_TOL: f64 = 1e-8;
const RESIDUE_SEPARATION: f64 = 0.1;
const SPECTRAL_GAIN: f64 = 1e3;

/// Execution settings that do not change results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads for the samples of a suite; 0 or 1 runs sequentially.
    pub parallel: usize,
}

struct SampleOutcome {
    checks: Vec<Check>,
    point: Value,
    error: Option<String>,
}

fn outcome(point: Value, body: impl FnOnce() -> Result<Vec<Check>>) -> SampleOutcome {
    match body() {
        Ok(checks) => SampleOutcome {
            checks,
            point,
            error: None,
        },
        Err(e) => SampleOutcome {
            checks: Vec::new(),
            point,
            error: Some(e.to_string()),
        },
    }
}

fn map_samples<F>(count: usize, options: RunOptions, f: F) -> Vec<SampleOutcome>
where
    F: Fn(usize) -> SampleOutcome + Sync + Send,
{
    if options.parallel > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(options.parallel).build() {
            return pool.install(|| (0..count).into_par_iter().map(&f).collect());
        }
    }
    (0..count).map(f).collect()
}

fn severity(check: &Check) -> f64 {
    match (check.value, check.bound) {
        (None, _) => f64::INFINITY,
        (Some(v), Bound::AtMost(l)) => {
            if l > 0.0 {
                v / l
            } else if v > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        }
        (Some(v), Bound::AtLeast(l)) => {
            if v > 0.0 {
                l / v
            } else {
                f64::INFINITY
            }
        }
        (Some(v), Bound::WithinFactor(l)) => v.ln().abs() / l.ln(),
    }
}

fn record(sample: Option<usize>, check: &Check, point: &Value) -> FailureRecord {
    FailureRecord {
        sample,
        check: check.name.clone(),
        value: check.value,
        bound: Some(check.bound),
        error: None,
        point: point.clone(),
    }
}

fn aggregate(suite: Suite, global: Vec<Check>, samples: Vec<SampleOutcome>) -> SuiteReport {
    let mut report = SuiteReport {
        suite: suite.name().to_string(),
        passed: true,
        samples: samples.len(),
        checks: 0,
        failure_count: 0,
        max_residual: 0.0,
        residuals: BTreeMap::new(),
        estimates: BTreeMap::new(),
        worst: None,
        failures: Vec::new(),
    };
    let mut worst_severity = f64::NEG_INFINITY;
    let global = SampleOutcome {
        checks: global,
        point: Value::Null,
        error: None,
    };
    let indexed = std::iter::once((None, global)).chain(samples.into_iter().enumerate().map(|(k, s)| (Some(k), s)));
    for (sample, s) in indexed {
        if let Some(err) = s.error {
            report.passed = false;
            report.failure_count += 1;
            if report.failures.len() < MAX_FAILURE_RECORDS {
                report.failures.push(FailureRecord {
                    sample,
                    check: "error".into(),
                    value: None,
                    bound: None,
                    error: Some(err),
                    point: s.point.clone(),
                });
            }
            continue;
        }
        for c in &s.checks {
            report.checks += 1;
            let v = c.value.unwrap_or(f64::INFINITY);
            match c.bound {
                Bound::AtMost(_) => {
                    report.max_residual = report.max_residual.max(v);
                    let e = report.residuals.entry(c.name.clone()).or_insert(0.0);
                    *e = e.max(v);
                }
                Bound::AtLeast(_) => {
                    let e = report.estimates.entry(c.name.clone()).or_insert(f64::INFINITY);
                    *e = e.min(v);
                }
                Bound::WithinFactor(_) => {
                    let e = report.estimates.entry(c.name.clone()).or_insert(1.0);
                    if v.ln().abs() >= e.ln().abs() {
                        *e = v;
                    }
                }
            }
            let sev = severity(c);
            if sev > worst_severity {
                worst_severity = sev;
                report.worst = Some(record(sample, c, &s.point));
            }
            if !c.passed() {
                report.passed = false;
                report.failure_count += 1;
                if report.failures.len() < MAX_FAILURE_RECORDS {
                    report.failures.push(record(sample, c, &s.point));
                }
            }
        }
    }
    // non-finite values are reported as missing but still count as the worst residual
    if !report.max_residual.is_finite() {
        report.max_residual = f64::MAX;
    }
    for v in report.residuals.values_mut().chain(report.estimates.values_mut()) {
        if !v.is_finite() {
            *v = f64::MAX;
        }
    }
    report
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// The quiver and degree restricted to the support of `alpha`.
fn support(cfg: &RunConfig) -> Result<(Quiver, Degree)> {
    let keep: Vec<usize> = (0..cfg.quiver.rank()).filter(|&i| cfg.alpha.get(i) > 0).collect();
    let q = cfg.quiver.restrict(&keep)?;
    let a = Degree::new(keep.iter().map(|&i| cfg.alpha.get(i)).collect())?;
    Ok((q, a))
}

fn sizes(alpha: &Degree, minus_one: bool) -> Vec<usize> {
    alpha
        .coefficients()
        .iter()
        .map(|&a| a as usize - usize::from(minus_one))
        .collect()
}

fn ratios(rng: &mut ChaCha8Rng, sizes: &[usize]) -> Vec<Vec<Complex64>> {
    sizes.iter().map(|&n| (0..n).map(|_| sample_ratio(rng)).collect()).collect()
}

fn sample_off_lattice(rng: &mut ChaCha8Rng, mp: &ModularParam) -> Complex64 {
    loop {
        let w = sample_w(rng, mp);
        if lattice_distance(w, mp) >= POLE_MARGIN {
            return w;
        }
    }
}

/// Sampled data shared by the chart suites.
struct ChartSample {
    quiver: Quiver,
    alpha: Degree,
    w: Vec<Vec<Complex64>>,
    fiber: Vec<Vec<Complex64>>,
    ratio: Vec<Vec<Complex64>>,
}

impl ChartSample {
    fn draw(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let (quiver, alpha) = support(cfg)?;
        let w = sample_positions(rng, &alpha, &cfg.mp, cfg.tolerances.delta)?;
        let fiber = ratios(rng, &sizes(&alpha, false));
        let ratio = ratios(rng, &sizes(&alpha, true));
        Ok(ChartSample {
            quiver,
            alpha,
            w,
            fiber,
            ratio,
        })
    }

    fn json(&self) -> Value {
        json!({
            "vertices": self.quiver.vertices(),
            "alpha": self.alpha.coefficients(),
            "w": complex_rows_json(&self.w),
            "fiber": complex_rows_json(&self.fiber),
            "ratio": complex_rows_json(&self.ratio),
        })
    }

    fn unreduced(&self, kind: ChartKind, separation: f64) -> Result<UnreducedChartPoint> {
        Ok(
            UnreducedChartPoint::new(self.quiver.clone(), self.alpha.clone(), kind, self.w.clone(), self.fiber.clone())?
                .with_separation(separation),
        )
    }

    fn reduced(&self, kind: ChartKind, separation: f64) -> Result<ReducedChartPoint> {
        Ok(
            ReducedChartPoint::from_full_w(self.quiver.clone(), self.alpha.clone(), kind, self.w.clone(), self.ratio.clone())?
                .with_separation(separation),
        )
    }
}

fn elliptic_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mp = &cfg.mp;
    let mut rng = sample_rng(cfg.seed, Suite::EllipticIdentities.code(), index as u64);
    let w = sample_off_lattice(&mut rng, mp);
    outcome(json!({ "w": complex_json(w) }), || {
        let tol = cfg.tolerances.tol;
        let (eta1, eta2) = quasi_periods(mp);
        let z = weierstrass_zeta(w, mp)?;
        let scale = z.norm().max(1.0);
        let mut checks = vec![
            Check::at_most("zeta_odd", (z + weierstrass_zeta(-w, mp)?).norm() / scale, tol),
            Check::at_most("zeta_shift_1", (weierstrass_zeta(w + 1.0, mp)? - z - eta1).norm() / scale, tol),
            Check::at_most("zeta_shift_tau", (weierstrass_zeta(w + mp.tau(), mp)? - z - eta2).norm() / scale, tol),
        ];
        let p = weierstrass_p(w, mp)?;
        let fd = |h: f64| -> Result<f64> {
            let d = (weierstrass_zeta(w + h, mp)? - weierstrass_zeta(w - h, mp)?) / (2.0 * h);
            Ok(rel(-d, p))
        };
        let (e1, e2) = (fd(DERIVATIVE_STEP)?, fd(DERIVATIVE_STEP / 2.0)?);
        checks.push(Check::at_most("zeta_derivative", e1, DERIVATIVE_TOL));
        checks.push(Check::new("zeta_derivative_order", (e1 / e2).log2(), Bound::AtLeast(1.8)));
        let raw = zeta_lattice_oracle(w, mp, ORACLE_CUTOFF)?;
        let extrapolated = zeta_lattice_oracle_extrapolated(w, mp, ORACLE_CUTOFF)?;
        checks.push(Check::at_most("oracle", (z - extrapolated).norm(), ORACLE_TOL));
        checks.push(Check::at_most(
            "oracle_raw_over_bound",
            (z - raw).norm() / zeta_lattice_truncation_bound(w, mp, ORACLE_CUTOFF),
            1.0,
        ));
        Ok(checks)
    })
}

fn elliptic_global(cfg: &RunConfig) -> Vec<Check> {
    let (eta1, eta2) = quasi_periods(&cfg.mp);
    let legendre = eta1 * cfg.mp.tau() - eta2;
    vec![Check::at_most("legendre", (legendre.norm() - 2.0 * PI).abs(), cfg.tolerances.tol)]
}

fn antisymmetry_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, Suite::BracketAntisymmetry.code(), index as u64);
    let s = match ChartSample::draw(cfg, &mut rng) {
        Ok(s) => s,
        Err(e) => return outcome(Value::Null, || Err(e)),
    };
    outcome(s.json(), || {
        let delta = cfg.tolerances.delta;
        let spec = TransformSpec::new(s.quiver.clone(), s.alpha.clone(), cfg.mp)?;
        let coulomb = s.reduced(ChartKind::Coulomb, delta)?;
        let matrices: [(&str, BracketMatrix); 5] = [
            ("rational", rational_bracket_matrix(&s.unreduced(ChartKind::Zastava, delta)?)?),
            ("coulomb", coulomb_bracket_matrix(&s.unreduced(ChartKind::Coulomb, delta)?)?),
            ("elliptic_fo", fo_reduced_bracket_matrix(&s.reduced(ChartKind::Zastava, delta)?, &cfg.mp)?),
            ("coulomb_reduced", coulomb_reduced_bracket_matrix(&coulomb)?),
            ("pushforward", pushforward_bracket(&spec, &coulomb)?),
        ];
        Ok(matrices
            .iter()
            .map(|(name, m)| Check::at_most(*name, m.antisymmetry_residual(), ANTISYMMETRY_TOL))
            .collect())
    })
}

fn jacobi_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, Suite::Jacobi.code(), index as u64);
    let s = match ChartSample::draw(cfg, &mut rng) {
        Ok(s) => s,
        Err(e) => return outcome(Value::Null, || Err(e)),
    };
    outcome(s.json(), || {
        let delta = cfg.tolerances.delta;
        let tol = cfg.tolerances.jacobi_tol;
        let cases: [(&str, BracketFamily, ChartPoint); 4] = [
            ("rational", BracketFamily::Rational, s.unreduced(ChartKind::Zastava, delta)?.into()),
            ("coulomb", BracketFamily::Coulomb, s.unreduced(ChartKind::Coulomb, delta)?.into()),
            (
                "elliptic_fo",
                BracketFamily::EllipticFo { mp: cfg.mp },
                s.reduced(ChartKind::Zastava, delta)?.into(),
            ),
            ("coulomb_reduced", BracketFamily::CoulombReduced, s.reduced(ChartKind::Coulomb, delta)?.into()),
        ];
        cases
            .iter()
            .map(|(name, family, point)| {
                let (r, _) = bracket_field(family, point)?.max_jacobiator();
                Ok(Check::at_most(*name, r, tol))
            })
            .collect()
    })
}

/// Entrywise distance between two bracket matrices: relative where the
/// reference is nonzero, relative to the largest reference entry elsewhere.
pub(crate) fn matrix_distance(got: &BracketMatrix, reference: &BracketMatrix) -> f64 {
    let scale = reference.max_abs().max(f64::MIN_POSITIVE);
    got.entries()
        .iter()
        .zip(reference.entries())
        .map(|(a, b)| {
            let d = (a - b).norm();
            if b.norm() > 0.0 {
                d / b.norm()
            } else {
                d / scale
            }
        })
        .fold(0.0, f64::max)
}

fn pushforward_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, Suite::Pushforward.code(), index as u64);
    let s = match ChartSample::draw(cfg, &mut rng) {
        Ok(s) => s,
        Err(e) => return outcome(Value::Null, || Err(e)),
    };
    let kappa = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let mut point = s.json();
    point["gauge_kappa"] = complex_json(kappa);
    outcome(point, || {
        let tol = cfg.tolerances.push_tol;
        let coulomb = s.reduced(ChartKind::Coulomb, cfg.tolerances.delta)?;
        let mut checks = Vec::new();
        let gauges = [
            ("unit_gauge", PhiGauge::Unit),
            ("quadratic_gauge", PhiGauge::Custom(Arc::new(QuadraticGauge { kappa }))),
        ];
        for (name, gauge) in gauges {
            let spec = TransformSpec::new(s.quiver.clone(), s.alpha.clone(), cfg.mp)?.with_gauge(gauge);
            let pushed = pushforward_bracket(&spec, &coulomb)?;
            let image = zastava_from_coulomb(&spec, &coulomb)?;
            let fo = fo_reduced_bracket_matrix(&image, &cfg.mp)?;
            checks.push(Check::at_most(name, matrix_distance(&pushed, &fo), tol));
        }
        Ok(checks)
    })
}

fn degeneration_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, Suite::Degenerations.code(), index as u64);
    let four = match sample_four_points(&mut rng, 0.05) {
        Ok(f) => f,
        Err(e) => return outcome(Value::Null, || Err(e)),
    };
    outcome(serde_json::to_value(four).unwrap_or(Value::Null), || {
        let rational = rational_limit_check(&cfg.mp, &four, &RATIONAL_LADDER)?;
        // orders are only meaningful while both errors sit above rounding;
        // lattices with g2 = 0 converge faster and reach it early
        let noise = RATIONAL_NOISE * rational_combination(&four)?.norm().max(1.0);
        let orders: Vec<f64> = rational
            .rates
            .iter()
            .zip(rational.errors.windows(2))
            .filter(|(_, e)| e[1] > noise)
            .map(|(r, _)| *r)
            .collect();
        let trig = trigonometric_limit_check(&four, cfg.tau().re, &TRIG_LADDER)?;
        let rational_check = if orders.is_empty() {
            Check::at_most("rational_error_below_noise", rational.errors[rational.errors.len() - 1], noise)
        } else {
            Check::new(
                "rational_order",
                orders.iter().copied().fold(f64::INFINITY, f64::min),
                Bound::AtLeast(RATIONAL_MIN_ORDER),
            )
        };
        Ok(vec![
            rational_check,
            Check::new("trigonometric_rate", trig.rates[0], Bound::WithinFactor(TRIG_RATE_FACTOR)),
            Check::at_most("trigonometric_error_far", trig.errors[2], TRIG_FAR_TOL),
        ])
    })
}

/// A random degree of total at most [`MAX_RANK_TOTAL`] on `rank` vertices.
fn random_degree(rng: &mut ChaCha8Rng, rank: usize) -> Degree {
    loop {
        let total = rng.gen_range(1..=MAX_RANK_TOTAL);
        let mut a = vec![0u32; rank];
        for _ in 0..total {
            a[rng.gen_range(0..rank)] += 1;
        }
        if let Ok(d) = Degree::new(a) {
            return d;
        }
    }
}

pub(crate) fn rank_sum(alpha: &Degree) -> Result<u128> {
    enumerate_subdegrees(alpha)
        .iter()
        .map(|b| mirkovic_summand_rank(alpha, b))
        .sum()
}

fn split_degree(alpha: &Degree, mask: &[bool]) -> (Degree, Degree) {
    let part = |keep: bool| {
        Degree::sub(
            alpha
                .coefficients()
                .iter()
                .zip(mask)
                .map(|(&a, &m)| if m == keep { a } else { 0 })
                .collect(),
        )
    };
    (part(true), part(false))
}

/// Checks that every summand rank of `alpha` factors over a split of the vertices.
pub(crate) fn rank_factorization_defect(alpha: &Degree, mask: &[bool]) -> Result<u128> {
    let (left, right) = split_degree(alpha, mask);
    let mut defect = 0u128;
    for beta in enumerate_subdegrees(alpha) {
        let (bl, br) = split_degree(&beta, mask);
        let whole = mirkovic_summand_rank(alpha, &beta)?;
        let parts = mirkovic_summand_rank(&left, &bl)? * mirkovic_summand_rank(&right, &br)?;
        defect += whole.abs_diff(parts);
    }
    Ok(defect)
}

fn ranks_segre_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, Suite::RanksSegre.code(), index as u64);
    let rank = cfg.quiver.rank();
    let alpha = random_degree(&mut rng, rank);
    let mask: Vec<bool> = (0..rank).map(|_| rng.gen_bool(0.5)).collect();
    // a single factor satisfies no relation, so every vector of length 2 is embedded
    let factors = alpha.total().clamp(2, MAX_SEGRE_FACTORS) as usize;
    let values: Vec<Complex64> = (0..factors).map(|_| sample_ratio(&mut rng)).collect();
    let slot = rng.gen_range(1..(1usize << factors));
    let kick = Complex64::from_polar(SEGRE_PERTURBATION, rng.gen_range(0.0..2.0 * PI));
    let point = json!({
        "alpha": alpha.coefficients(),
        "split": mask,
        "segre_values": values.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
        "perturbed_subset": slot,
        "perturbation": complex_json(kick),
    });
    outcome(point, || {
        let total = rank_sum(&alpha)?;
        let expected = 1u128 << alpha.total();
        let embedded = segre_embed(std::slice::from_ref(&values));
        let mut entries = embedded.entries().to_vec();
        entries[slot] *= Complex64::new(1.0, 0.0) + kick;
        let perturbed = SegreVector::new(embedded.index().to_vec(), entries)?;
        Ok(vec![
            Check::at_most("rank_sum_defect", total.abs_diff(expected) as f64, 0.0),
            Check::at_most("rank_factorization_defect", rank_factorization_defect(&alpha, &mask)? as f64, 0.0),
            Check::at_most("segre_embedded", segre_residual(&embedded), 0.0),
            Check::new("segre_perturbed", segre_residual(&perturbed), Bound::AtLeast(f64::MIN_POSITIVE)),
        ])
    })
}

fn ranks_global(cfg: &RunConfig) -> Vec<Check> {
    match rank_sum(&cfg.alpha) {
        Ok(total) => vec![Check::at_most(
            "rank_sum_defect",
            total.abs_diff(1u128 << cfg.alpha.total()) as f64,
            0.0,
        )],
        Err(_) => vec![Check::at_most("rank_sum_defect", f64::NAN, 0.0)],
    }
}

fn a2_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, Suite::A2Model.code(), index as u64);
    let (w1, w2) = loop {
        let (a, b) = (sample_w(&mut rng, &cfg.mp), sample_w(&mut rng, &cfg.mp));
        if (a - b).norm() >= cfg.tolerances.delta {
            break (a, b);
        }
    };
    let (yi, yj) = (sample_ratio(&mut rng), sample_ratio(&mut rng));
    let near = w1 + Complex64::from_polar(NEAR_DIAGONAL, rng.gen_range(0.0..2.0 * PI));
    let point = json!({
        "w1": complex_json(w1), "w2": complex_json(w2), "w2_near": complex_json(near),
        "y_i": complex_json(yi), "y_j": complex_json(yj),
    });
    outcome(point, || {
        let generic = a2_local_model(w1, w2, yi, yj)?;
        let close = a2_local_model(w1, near, yi, yj)?;
        let product = yi * yj;
        Ok(vec![
            Check::at_most("regularity", (generic.regularity - 1.0).norm(), 0.0),
            Check::at_most("near_diagonal_equation", (close.y_ij * (w1 - near) - product).norm() / product.norm(), NEAR_DIAGONAL_TOL),
            Check::at_most("near_diagonal_bracket", (close.bracket + close.y_ij).norm() / close.y_ij.norm(), NEAR_DIAGONAL_TOL),
        ])
    })
}

fn flows_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, Suite::Flows.code(), index as u64);
    let s = match ChartSample::draw(cfg, &mut rng) {
        Ok(s) => s,
        Err(e) => return outcome(Value::Null, || Err(e)),
    };
    let vertex = index % s.quiver.rank();
    let mut point = s.json();
    point["moment_vertex"] = json!(s.quiver.vertices()[vertex]);
    outcome(point, || {
        let delta = cfg.tolerances.delta;
        let mut checks = Vec::new();
        // z(t) = z(0) e^t along the moment flow of one color
        let start: ChartPoint = s.unreduced(ChartKind::Coulomb, delta)?.into();
        let report = flow_integrate(&BracketFamily::Coulomb, &start, &Hamiltonian::Moment(vertex), 1.0, FLOW_STEPS)?;
        let ChartPoint::Unreduced(end) = report.final_point.as_ref().ok_or(Error::Validation("flow ended without a point".into()))? else {
            return Err(Error::Validation("flow changed chart type".into()));
        };
        let mut exp_err: f64 = 0.0;
        for i in 0..s.quiver.rank() {
            let factor = if i == vertex { 1f64.exp() } else { 1.0 };
            for (z1, z0) in end.fiber(i).iter().zip(&s.fiber[i]) {
                exp_err = exp_err.max((z1 - z0 * factor).norm() / (z0 * factor).norm());
            }
        }
        checks.push(Check::at_most("moment_flow_exponential", exp_err, FLOW_TOL));
        checks.push(Check::at_most("moment_flow_h_drift", report.h_drift, FLOW_TOL));

        // coordinate flows on the reduced elliptic chart keep the moment
        let family = BracketFamily::EllipticFo { mp: cfg.mp };
        let start: ChartPoint = s.reduced(ChartKind::Zastava, delta)?.into();
        let speed = start.coords().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let t_end = 0.01 / speed;
        let mut moment_drift: f64 = 0.0;
        let mut h_drift: f64 = 0.0;
        for k in 0..start.dim() {
            let r = flow_integrate(&family, &start, &Hamiltonian::Coordinate(k), t_end, CHART_FLOW_STEPS)?;
            moment_drift = r.moment_drift.iter().copied().fold(moment_drift, f64::max);
            h_drift = h_drift.max(r.h_drift);
        }
        checks.push(Check::at_most("chart_flow_moment_drift", moment_drift, FLOW_TOL));
        checks.push(Check::at_most("chart_flow_h_drift", h_drift, FLOW_TOL));
        Ok(checks)
    })
}

/// Residue recovery errors with 64 and 32 nodes.
fn residue_errors(poles: &[Complex64], residues: &[Complex64], mp: &ModularParam) -> Result<(f64, f64)> {
    let err = |nodes: usize| -> Result<f64> {
        let opts = ContourOptions {
            nodes,
            separation: RESIDUE_SEPARATION,
        };
        let got = sl2_residue_coordinates(poles, residues, mp, &opts)?;
        Ok(got.iter().zip(residues).map(|(g, c)| rel(*g, *c)).fold(0.0, f64::max))
    };
    Ok((err(RESIDUE_NODES)?, err(RESIDUE_NODES / 2)?))
}

fn residue_checks(poles: &[Complex64], residues: &[Complex64], mp: &ModularParam) -> Result<Vec<Check>> {
    let (fine, coarse) = residue_errors(poles, residues, mp)?;
    let mut checks = vec![Check::at_most("residue_error", fine, RESIDUE_TOL)];
    // the gain is only measurable while the coarse error is above rounding
    if coarse > SPECTRAL_GAIN * 1e-13 {
        checks.push(Check::new(
            "spectral_gain",
            coarse / fine.max(f64::EPSILON),
            Bound::AtLeast(SPECTRAL_GAIN),
        ));
    }
    Ok(checks)
}

fn residue_sample(cfg: &RunConfig, index: usize) -> SampleOutcome {
    let mut rng = sample_rng(cfg.seed, Suite::ResidueCoords.code(), index as u64);
    let count = 2 + index % 3;
    let drawn = Degree::new(vec![count as u32]).and_then(|d| sample_positions(&mut rng, &d, &cfg.mp, RESIDUE_SEPARATION));
    let poles = match drawn {
        Ok(p) => p.concat(),
        Err(e) => return outcome(Value::Null, || Err(e)),
    };
    let mut residues: Vec<Complex64> = (0..count - 1).map(|_| sample_ratio(&mut rng)).collect();
    residues.push(-residues.iter().sum::<Complex64>());
    let point = json!({
        "poles": poles.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
        "residues": residues.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
    });
    outcome(point, || residue_checks(&poles, &residues, &cfg.mp))
}

/// A fixed configuration with a neighbouring pole at distance 0.1, so the
/// spectral gain is always exercised.
fn residue_global(cfg: &RunConfig) -> Vec<Check> {
    let poles = [Complex64::new(0.0, 0.0), Complex64::new(0.1, 0.0), Complex64::new(0.37, 0.21)];
    let residues = [Complex64::new(1.0, 0.0), Complex64::new(-0.4, 0.0), Complex64::new(-0.6, 0.0)];
    residue_checks(&poles, &residues, &cfg.mp).unwrap_or_else(|_| vec![Check::at_most("residue_error", f64::NAN, RESIDUE_TOL)])
}

type SampleFn = fn(&RunConfig, usize) -> SampleOutcome;

/// Runs one suite over its seeded samples.
pub fn run_suite(cfg: &RunConfig, suite: Suite, options: RunOptions) -> SuiteReport {
    let count = cfg.samples_for(suite);
    let (global, f): (Vec<Check>, SampleFn) = match suite {
        Suite::EllipticIdentities => (elliptic_global(cfg), elliptic_sample),
        Suite::BracketAntisymmetry => (Vec::new(), antisymmetry_sample),
        Suite::Jacobi => (Vec::new(), jacobi_sample),
        Suite::Pushforward => (Vec::new(), pushforward_sample),
        Suite::Degenerations => (Vec::new(), degeneration_sample),
        Suite::RanksSegre => (ranks_global(cfg), ranks_segre_sample),
        Suite::A2Model => (Vec::new(), a2_sample),
        Suite::Flows => (Vec::new(), flows_sample),
        Suite::ResidueCoords => (residue_global(cfg), residue_sample),
    };
    let samples = map_samples(count, options, |k| f(cfg, k));
    aggregate(suite, global, samples)
}

/// Runs the configured suites in order.
pub fn run_suites(cfg: &RunConfig, options: RunOptions) -> VerificationReport {
    let mut suites = Vec::with_capacity(cfg.suites.len());
    let mut timings = BTreeMap::new();
    for &suite in &cfg.suites {
        let start = Instant::now();
        suites.push(run_suite(cfg, suite, options));
        timings.insert(suite.name().to_string(), start.elapsed().as_secs_f64());
    }
    VerificationReport::new(cfg.echo(), suites, timings)
}
