//! End-to-end acceptance criteria. Runs without the libtest harness and
//! prints one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use zastava::charts::{
    bracket_field, coulomb_bracket_matrix, coulomb_reduced_bracket_matrix, flow_integrate, fo_reduced_bracket_matrix,
    rational_bracket_matrix, BracketFamily, BracketMatrix, ChartKind, ChartPoint, Hamiltonian, ReducedChartPoint,
    UnreducedChartPoint,
};
use zastava::elliptic::{
    lattice_distance, quasi_periods, weierstrass_p, weierstrass_zeta, zeta_lattice_oracle,
    zeta_lattice_oracle_extrapolated, zeta_lattice_truncation_bound, ModularParam,
};
use zastava::local::{a2_local_model, mirkovic_summand_rank, segre_embed, segre_residual, SegreVector};
use zastava::quiver::{enumerate_subdegrees, Degree, Quiver};
use zastava::transform::{
    pushforward_bracket, rational_limit_check, sl2_residue_coordinates, trigonometric_limit_check,
    zastava_from_coulomb, ContourOptions, TransformSpec,
};
use zastava::verify::{sample_four_points, sample_positions, sample_ratio, sample_rng, sample_w};

const SEED: u64 = 0x5eed_2024;
const DELTA: f64 = 1e-3;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn taus() -> [(&'static str, ModularParam); 3] {
    [
        ("i", ModularParam::new(c(0.0, 1.0)).unwrap()),
        ("1/2+i", ModularParam::new(c(0.5, 1.0)).unwrap()),
        ("2i", ModularParam::new(c(0.0, 2.0)).unwrap()),
    ]
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn rng(stream: u64, index: u64) -> ChaCha8Rng {
    sample_rng(SEED, 100 + stream, index)
}

/// Outcome of one criterion: pass flag and a one-line summary.
struct Outcome {
    passed: bool,
    detail: String,
}

fn summarize(parts: Vec<(String, bool)>) -> Outcome {
    Outcome {
        passed: parts.iter().all(|(_, ok)| *ok),
        detail: parts
            .into_iter()
            .map(|(s, ok)| if ok { s } else { format!("{s} [FAILED]") })
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

fn min_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::INFINITY, |a: f64, b| if b.is_nan() { f64::NEG_INFINITY } else { a.min(b) })
}

// 1. zeta' = -wp, oddness, quasi-periodicity, Legendre, lattice-sum oracle.
fn special_functions() -> Outcome {
    let h = 1e-4;
    let mut deriv = 0.0f64;
    let mut order = f64::INFINITY;
    let mut sym = 0.0f64;
    let mut legendre = 0.0f64;
    let mut oracle = 0.0f64;
    let mut raw_over_bound = 0.0f64;
    for (k, (_, mp)) in taus().iter().enumerate() {
        let points: Vec<Complex64> = (0..100)
            .map(|j| {
                let mut r = rng(1, (k * 1000 + j) as u64);
                loop {
                    let w = sample_w(&mut r, mp);
                    if lattice_distance(w, mp) >= 0.1 {
                        return w;
                    }
                }
            })
            .collect();
        let (eta1, eta2) = quasi_periods(mp);
        legendre = legendre.max(((eta1 * mp.tau() - eta2).norm() - 2.0 * PI).abs());
        for &w in &points {
            let z = weierstrass_zeta(w, mp).unwrap();
            let p = weierstrass_p(w, mp).unwrap();
            let fd = |h: f64| {
                let d = (weierstrass_zeta(w + h, mp).unwrap() - weierstrass_zeta(w - h, mp).unwrap()) / (2.0 * h);
                rel(-d, p)
            };
            let (e1, e2) = (fd(h), fd(h / 2.0));
            deriv = deriv.max(e1);
            order = order.min((e1 / e2).log2());
            let scale = z.norm().max(1.0);
            sym = max_of([
                sym,
                (z + weierstrass_zeta(-w, mp).unwrap()).norm() / scale,
                (weierstrass_zeta(w + 1.0, mp).unwrap() - z - eta1).norm() / scale,
                (weierstrass_zeta(w + mp.tau(), mp).unwrap() - z - eta2).norm() / scale,
            ]);
        }
        let errs: Vec<(f64, f64)> = points
            .par_iter()
            .map(|&w| {
                let z = weierstrass_zeta(w, mp).unwrap();
                let ext = zeta_lattice_oracle_extrapolated(w, mp, 500).unwrap();
                let raw = zeta_lattice_oracle(w, mp, 500).unwrap();
                ((z - ext).norm(), (z - raw).norm() / zeta_lattice_truncation_bound(w, mp, 500))
            })
            .collect();
        oracle = max_of(errs.iter().map(|e| e.0).chain([oracle]));
        raw_over_bound = max_of(errs.iter().map(|e| e.1).chain([raw_over_bound]));
    }
    summarize(vec![
        (format!("zeta'+wp rel err {deriv:.2e} < 1e-6"), deriv < 1e-6),
        (format!("min observed order {order:.3} >= 1.8"), order >= 1.8),
        (format!("odd/quasi-periodic {sym:.2e} < 1e-10"), sym < 1e-10),
        (format!("||eta1 tau - eta2| - 2pi| {legendre:.2e} < 1e-10"), legendre < 1e-10),
        (format!("oracle(500, extrapolated) diff {oracle:.2e} < 1e-7"), oracle < 1e-7),
        (format!("raw oracle diff / truncation bound {raw_over_bound:.2e} <= 1"), raw_over_bound <= 1.0),
    ])
}

fn antisymmetry(m: &BracketMatrix) -> f64 {
    let n = m.dim();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            worst = worst.max((m.get(a, b) + m.get(b, a)).norm() / scale);
        }
    }
    worst
}

struct Sample {
    quiver: Quiver,
    alpha: Degree,
    w: Vec<Vec<Complex64>>,
    fiber: Vec<Vec<Complex64>>,
    ratio: Vec<Vec<Complex64>>,
}

fn draw(quiver: &Quiver, mp: &ModularParam, r: &mut ChaCha8Rng, sizes: &[u32]) -> Sample {
    let a: Vec<u32> = (0..quiver.rank()).map(|_| sizes[r.gen_range(0..sizes.len())]).collect();
    let alpha = Degree::new(a).unwrap();
    let w = sample_positions(r, &alpha, mp, DELTA).unwrap();
    let fiber = alpha.coefficients().iter().map(|&n| (0..n).map(|_| sample_ratio(r)).collect()).collect();
    let ratio = alpha.coefficients().iter().map(|&n| (1..n).map(|_| sample_ratio(r)).collect()).collect();
    Sample {
        quiver: quiver.clone(),
        alpha,
        w,
        fiber,
        ratio,
    }
}

impl Sample {
    fn unreduced(&self, kind: ChartKind) -> UnreducedChartPoint {
        UnreducedChartPoint::new(self.quiver.clone(), self.alpha.clone(), kind, self.w.clone(), self.fiber.clone()).unwrap()
    }

    fn reduced(&self, kind: ChartKind) -> ReducedChartPoint {
        ReducedChartPoint::from_full_w(self.quiver.clone(), self.alpha.clone(), kind, self.w.clone(), self.ratio.clone())
            .unwrap()
    }
}

// 2. Antisymmetry and Jacobi identity of every chart bracket.
fn bracket_well_formedness() -> Outcome {
    let mp = ModularParam::new(c(0.5, 1.0)).unwrap();
    let mut parts = Vec::new();
    for (k, name) in ["A1", "A2", "A3", "D4"].iter().enumerate() {
        let quiver = Quiver::named(name).unwrap();
        let results: Vec<(f64, f64)> = (0..50u64)
            .into_par_iter()
            .map(|j| {
                let mut r = rng(2, k as u64 * 1000 + j);
                let s = draw(&quiver, &mp, &mut r, &[1, 2, 3]);
                let coulomb = s.reduced(ChartKind::Coulomb);
                let spec = TransformSpec::new(s.quiver.clone(), s.alpha.clone(), mp).unwrap();
                let matrices = [
                    rational_bracket_matrix(&s.unreduced(ChartKind::Zastava)).unwrap(),
                    coulomb_bracket_matrix(&s.unreduced(ChartKind::Coulomb)).unwrap(),
                    fo_reduced_bracket_matrix(&s.reduced(ChartKind::Zastava), &mp).unwrap(),
                    coulomb_reduced_bracket_matrix(&coulomb).unwrap(),
                    pushforward_bracket(&spec, &coulomb).unwrap(),
                ];
                let anti = max_of(matrices.iter().map(antisymmetry));
                let cases: [(BracketFamily, ChartPoint); 4] = [
                    (BracketFamily::Rational, s.unreduced(ChartKind::Zastava).into()),
                    (BracketFamily::Coulomb, s.unreduced(ChartKind::Coulomb).into()),
                    (BracketFamily::EllipticFo { mp }, s.reduced(ChartKind::Zastava).into()),
                    (BracketFamily::CoulombReduced, coulomb.into()),
                ];
                let jac = max_of(cases.iter().map(|(f, p)| {
                    let field = bracket_field(f, p).unwrap();
                    let n = p.dim();
                    let mut worst: f64 = 0.0;
                    for a in 0..n {
                        for b in a + 1..n {
                            for cc in b + 1..n {
                                worst = worst.max(field.jacobiator(a, b, cc).norm());
                            }
                        }
                    }
                    worst
                }));
                (anti, jac)
            })
            .collect();
        let anti = max_of(results.iter().map(|r| r.0));
        let jac = max_of(results.iter().map(|r| r.1));
        parts.push((format!("{name}: antisymmetry {anti:.1e}, jacobiator {jac:.1e}"), anti <= 1e-12 && jac < 1e-8));
    }
    summarize(parts)
}

/// Entrywise relative distance; entries where the reference vanishes are
/// compared against the largest reference entry.
fn entrywise_relative(got: &BracketMatrix, reference: &BracketMatrix) -> f64 {
    let scale = reference.max_abs().max(f64::MIN_POSITIVE);
    max_of(got.entries().iter().zip(reference.entries()).map(|(a, b)| {
        let d = (a - b).norm();
        if b.norm() > 0.0 {
            d / b.norm()
        } else {
            d / scale
        }
    }))
}

// 3. Pushforward of the reduced Coulomb bracket equals the elliptic bracket.
fn transform_identity() -> Outcome {
    let mut parts = Vec::new();
    for (k, name) in ["A2", "A3", "D4"].iter().enumerate() {
        let quiver = Quiver::named(name).unwrap();
        for (t, (tau_name, mp)) in taus().iter().enumerate() {
            let errs: Vec<f64> = (0..20u64)
                .into_par_iter()
                .map(|j| {
                    let mut r = rng(3, (k * 10 + t) as u64 * 1000 + j);
                    let s = draw(&quiver, mp, &mut r, &[2, 3]);
                    let spec = TransformSpec::new(s.quiver.clone(), s.alpha.clone(), *mp).unwrap();
                    let coulomb = s.reduced(ChartKind::Coulomb);
                    let pushed = pushforward_bracket(&spec, &coulomb).unwrap();
                    let fo = fo_reduced_bracket_matrix(&zastava_from_coulomb(&spec, &coulomb).unwrap(), mp).unwrap();
                    entrywise_relative(&pushed, &fo)
                })
                .collect();
            let worst = max_of(errs);
            parts.push((format!("{name}/tau={tau_name} {worst:.1e}"), worst < 1e-9));
        }
    }
    let passed = parts.iter().all(|p| p.1);
    Outcome {
        passed,
        detail: format!(
            "max entrywise rel err < 1e-9 over 20 points each: {}",
            parts
                .into_iter()
                .map(|(s, ok)| if ok { s } else { format!("{s} [FAILED]") })
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

// 4. Rational and trigonometric degenerations of the four-term combination.
fn degenerations() -> Outcome {
    let ladder = [1e-2, 5e-3, 2.5e-3];
    let mut order = f64::INFINITY;
    let mut rate_dev = 1.0f64;
    let mut far = 0.0f64;
    for (k, (_, mp)) in taus().iter().enumerate() {
        for j in 0..10u64 {
            let four = sample_four_points(&mut rng(4, k as u64 * 1000 + j), 0.05).unwrap();
            let r = rational_limit_check(mp, &four, &ladder).unwrap();
            order = min_of(r.rates.iter().copied().chain([order]));
        }
    }
    for (k, re) in [0.0, 0.5].iter().enumerate() {
        for j in 0..10u64 {
            let four = sample_four_points(&mut rng(5, k as u64 * 1000 + j), 0.05).unwrap();
            let t = trigonometric_limit_check(&four, *re, &[1.5, 2.0, 4.0]).unwrap();
            let ratio = t.rates[0];
            if ratio.ln().abs() > rate_dev.ln().abs() {
                rate_dev = ratio;
            }
            far = far.max(t.errors[2]);
        }
    }
    summarize(vec![
        (format!("rational order min {order:.3} >= 3.5"), order >= 3.5),
        (
            format!("trigonometric (e1.5/e2)/(|q1.5|/|q2|) worst {rate_dev:.3} within factor 3"),
            (1.0 / 3.0..=3.0).contains(&rate_dev),
        ),
        (format!("error at Im tau = 4: {far:.2e} < 1e-9"), far < 1e-9),
    ])
}

fn all_degrees(rank: usize, max_total: u32) -> Vec<Degree> {
    let mut out = Vec::new();
    let mut a = vec![0u32; rank];
    loop {
        let mut k = 0;
        loop {
            if k == rank {
                return out;
            }
            a[k] += 1;
            if a.iter().sum::<u32>() <= max_total {
                break;
            }
            a[k] = 0;
            k += 1;
        }
        out.push(Degree::new(a.clone()).unwrap());
    }
}

fn binomial(n: u32, k: u32) -> u128 {
    (0..k).fold(1u128, |acc, t| acc * u128::from(n - t) / u128::from(t + 1))
}

// 5. Rank sums, rank factorization, Segre residuals.
fn combinatorics() -> Outcome {
    let mut degrees = 0usize;
    let mut sum_ok = true;
    let mut fact_ok = true;
    let mut closed_form_ok = true;
    for rank in 1..=4 {
        for alpha in all_degrees(rank, 12) {
            degrees += 1;
            let subs = enumerate_subdegrees(&alpha);
            let ranks: Vec<u128> = subs.iter().map(|b| mirkovic_summand_rank(&alpha, b).unwrap()).collect();
            sum_ok &= ranks.iter().sum::<u128>() == 1u128 << alpha.total();
            // independent product of binomials
            closed_form_ok &= subs.iter().zip(&ranks).all(|(b, &r)| {
                r == alpha
                    .coefficients()
                    .iter()
                    .zip(b.coefficients())
                    .map(|(&a, &b)| binomial(a, b))
                    .product::<u128>()
            });
            for mask in 1..(1u32 << rank) - 1 {
                let part = |d: &Degree, keep: bool| {
                    Degree::sub(
                        d.coefficients()
                            .iter()
                            .enumerate()
                            .map(|(i, &x)| if (mask >> i & 1 == 1) == keep { x } else { 0 })
                            .collect(),
                    )
                };
                let (left, right) = (part(&alpha, true), part(&alpha, false));
                fact_ok &= subs.iter().zip(&ranks).all(|(b, &r)| {
                    r == mirkovic_summand_rank(&left, &part(b, true)).unwrap()
                        * mirkovic_summand_rank(&right, &part(b, false)).unwrap()
                });
            }
        }
    }
    let mut embedded = 0.0f64;
    let mut perturbed_min = f64::INFINITY;
    for j in 0..200u64 {
        let mut r = rng(6, j);
        let n = r.gen_range(2..=10);
        let values: Vec<Complex64> = (0..n).map(|_| sample_ratio(&mut r)).collect();
        let v = segre_embed(&[values]);
        embedded = embedded.max(segre_residual(&v));
        let mut entries = v.entries().to_vec();
        let slot = r.gen_range(1..entries.len());
        entries[slot] *= c(1.0, 0.0) + Complex64::from_polar(1e-6, r.gen_range(0.0..2.0 * PI));
        let p = SegreVector::new(v.index().to_vec(), entries).unwrap();
        perturbed_min = perturbed_min.min(segre_residual(&p));
    }
    summarize(vec![
        (format!("sum of ranks = 2^|alpha| on {degrees} degrees (rank <= 4, |alpha| <= 12)"), sum_ok && closed_form_ok),
        ("rank factorization over every vertex split".into(), fact_ok),
        (format!("segre residual on embedded vectors {embedded:e} == 0"), embedded == 0.0),
        (format!("min residual after 1e-6 perturbation {perturbed_min:.2e} > 0"), perturbed_min > 0.0),
    ])
}

// 6. The A2 local model.
fn a2_model() -> Outcome {
    let mp = ModularParam::new(c(0.0, 1.0)).unwrap();
    let mut exact = 0usize;
    let mut near_eq = 0.0f64;
    let mut near_br = 0.0f64;
    for j in 0..1000u64 {
        let mut r = rng(7, j);
        let (w1, w2) = loop {
            let (a, b) = (sample_w(&mut r, &mp), sample_w(&mut r, &mp));
            if (a - b).norm() >= DELTA {
                break (a, b);
            }
        };
        let (yi, yj) = (sample_ratio(&mut r), sample_ratio(&mut r));
        let out = a2_local_model(w1, w2, yi, yj).unwrap();
        exact += usize::from(out.regularity == c(1.0, 0.0));
        let w3 = w1 + Complex64::from_polar(1e-6, r.gen_range(0.0..2.0 * PI));
        let close = a2_local_model(w1, w3, yi, yj).unwrap();
        let finite = close.y_ij.re.is_finite() && close.y_ij.im.is_finite();
        let eq = (close.y_ij * (w1 - w3) - yi * yj).norm() / (yi * yj).norm();
        // the A2 pairing is -1, so {y_i, y_j} -> -y_ij through the diagonal
        let br = (close.bracket + close.y_ij).norm() / close.y_ij.norm();
        near_eq = near_eq.max(if finite { eq } else { f64::INFINITY });
        near_br = near_br.max(br);
    }
    summarize(vec![
        (format!("regularity == 1 exactly on {exact}/1000 points"), exact == 1000),
        (
            format!("near-diagonal (|w1-w2| = 1e-6) equation {near_eq:.1e}, bracket {near_br:.1e} <= 1e-6"),
            near_eq <= 1e-6 && near_br <= 1e-6,
        ),
    ])
}

// 7. Hamiltonian flows.
fn flows() -> Outcome {
    let mp = ModularParam::new(c(0.5, 1.0)).unwrap();
    let quiver = Quiver::named("A2").unwrap();
    let mut exp_err = 0.0f64;
    let mut drift = 0.0f64;
    for j in 0..5u64 {
        let mut r = rng(8, j);
        let s = draw(&quiver, &mp, &mut r, &[2, 3]);
        for v in 0..quiver.rank() {
            let start: ChartPoint = s.unreduced(ChartKind::Coulomb).into();
            let rep = flow_integrate(&BracketFamily::Coulomb, &start, &Hamiltonian::Moment(v), 1.0, 1000).unwrap();
            let ChartPoint::Unreduced(end) = rep.final_point.unwrap() else { unreachable!() };
            for i in 0..quiver.rank() {
                let f = if i == v { 1f64.exp() } else { 1.0 };
                for (z1, z0) in end.fiber(i).iter().zip(&s.fiber[i]) {
                    exp_err = exp_err.max((z1 - z0 * f).norm() / (z0 * f).norm());
                }
            }
        }
        let start: ChartPoint = s.reduced(ChartKind::Zastava).into();
        let speed = max_of(start.coords().iter().map(|z| z.norm())).max(1.0);
        for k in 0..start.dim() {
            let rep = flow_integrate(&BracketFamily::EllipticFo { mp }, &start, &Hamiltonian::Coordinate(k), 0.01 / speed, 20).unwrap();
            drift = max_of(rep.moment_drift.iter().copied().chain([drift]));
        }
    }
    summarize(vec![
        (format!("moment flow z(1) vs z(0)e: {exp_err:.1e} <= 1e-8"), exp_err <= 1e-8),
        (format!("moment drift along coordinate flows {drift:.1e} < 1e-8"), drift < 1e-8),
    ])
}

// 8. Residue coordinates by contour quadrature.
fn residue_coordinates() -> Outcome {
    let mut fine = 0.0f64;
    let mut gain = f64::INFINITY;
    for (k, (_, mp)) in taus().iter().enumerate() {
        for j in 0..10u64 {
            let mut r = rng(9, k as u64 * 1000 + j);
            let p0 = sample_w(&mut r, mp);
            // a neighbouring pole at exactly twice the contour radius
            let p1 = p0 + Complex64::from_polar(0.1, r.gen_range(0.0..2.0 * PI));
            let mut poles = vec![p0, p1];
            while poles.len() < 4 {
                let p = sample_w(&mut r, mp);
                if poles.iter().all(|&q| lattice_distance(p - q, mp) >= 0.1) {
                    poles.push(p);
                }
            }
            let mut res: Vec<Complex64> = (0..3).map(|_| sample_ratio(&mut r)).collect();
            res.push(-res.iter().sum::<Complex64>());
            let err = |nodes| {
                let got = sl2_residue_coordinates(&poles, &res, mp, &ContourOptions { nodes, separation: 0.1 }).unwrap();
                max_of(got.iter().zip(&res).map(|(g, c)| rel(*g, *c)))
            };
            let (e64, e32) = (err(64), err(32));
            fine = fine.max(e64);
            gain = gain.min(e32 / e64.max(f64::EPSILON));
        }
    }
    summarize(vec![
        (format!("64-node residue error {fine:.1e} <= 1e-8"), fine <= 1e-8),
        (format!("32 -> 64 node improvement min {gain:.1e} >= 1e3"), gain >= 1e3),
    ])
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 special functions", special_functions),
        ("2 bracket well-formedness", bracket_well_formedness),
        ("3 transform identity", transform_identity),
        ("4 degenerations", degenerations),
        ("5 combinatorics", combinatorics),
        ("6 A2 local model", a2_model),
        ("7 flows", flows),
        ("8 residue coordinates", residue_coordinates),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let start = Instant::now();
        let out = run();
        all &= out.passed;
        println!(
            "{} criterion {name} ({:.1}s): {}",
            if out.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            out.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
