use num_complex::Complex64;
use proptest::prelude::*;

use zastava::charts::{
    coulomb_bracket_matrix, coulomb_reduced_bracket_matrix, fo_reduced_bracket_matrix, BracketMatrix, ChartKind,
    CoordKind, ReducedChartPoint, UnreducedChartPoint,
};
use zastava::elliptic::ModularParam;
use zastava::quiver::{Degree, Quiver};
use zastava::transform::{
    coulomb_from_zastava, psi_factor, pushforward_bracket, transform_jacobian, zastava_from_coulomb, TransformSpec,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tau_i() -> ModularParam {
    ModularParam::new(c(0.0, 1.0)).unwrap()
}

/// Positions spread over the fundamental domain, away from each other and
/// from lattice translates of each other.
fn positions(alpha: &[u32], shift: f64) -> Vec<Vec<Complex64>> {
    let mut k = 0.0;
    alpha
        .iter()
        .map(|&a| {
            (0..a)
                .map(|_| {
                    k += 1.0;
                    c(0.13 * k + shift, 0.071 * k * k % 0.83 - 0.37)
                })
                .collect()
        })
        .collect()
}

fn ratios(alpha: &[u32]) -> Vec<Vec<Complex64>> {
    alpha
        .iter()
        .enumerate()
        .map(|(i, &a)| (1..a).map(|r| c(0.7 + 0.2 * i as f64, 0.3 * r as f64 - 0.2)).collect())
        .collect()
}

fn reduced(quiver: &str, alpha: &[u32], kind: ChartKind) -> ReducedChartPoint {
    let q = Quiver::named(quiver).unwrap();
    let d = Degree::new(alpha.to_vec()).unwrap();
    ReducedChartPoint::from_full_w(q, d, kind, positions(alpha, 0.0), ratios(alpha)).unwrap()
}

fn slot_of(labels: &[zastava::charts::CoordLabel], kind: CoordKind, vertex: usize, index: usize) -> usize {
    labels
        .iter()
        .position(|l| l.kind == kind && l.vertex == vertex && l.index == index)
        .unwrap()
}

#[test]
fn fo_bracket_is_invariant_under_relabeling_within_a_color() {
    let mp = tau_i();
    let p = reduced("A2", &[3, 2], ChartKind::Zastava);
    let base = fo_reduced_bracket_matrix(&p, &mp).unwrap();

    let mut w = p.full_w_all();
    w[0].swap(0, 1);
    let mut y = p.ratios().to_vec();
    y[0].swap(0, 1);
    let q = ReducedChartPoint::from_full_w(p.quiver().clone(), p.alpha().clone(), ChartKind::Zastava, w, y).unwrap();
    let swapped = fo_reduced_bracket_matrix(&q, &mp).unwrap();

    let labels = base.labels();
    let n = base.dim();
    let mut perm: Vec<usize> = (0..n).collect();
    for kind in [CoordKind::W, CoordKind::YRatio] {
        let a = slot_of(labels, kind, 0, 0);
        let b = slot_of(labels, kind, 0, 1);
        perm.swap(a, b);
    }
    for a in 0..n {
        for b in 0..n {
            assert_eq!(base.get(a, b), swapped.get(perm[a], perm[b]), "entry ({a}, {b})");
        }
    }
}

#[test]
fn fo_bracket_restricts_to_full_subquivers() {
    let mp = tau_i();
    let p = reduced("A3", &[2, 2, 2], ChartKind::Zastava);
    let full = fo_reduced_bracket_matrix(&p, &mp).unwrap();
    let keep: Vec<usize> = full
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.vertex < 2)
        .map(|(k, _)| k)
        .collect();
    let sub = full.submatrix(&keep);
    let restricted = fo_reduced_bracket_matrix(&p.restrict(&[0, 1]).unwrap(), &mp).unwrap();
    assert_eq!(sub.dim(), restricted.dim());
    assert_eq!(sub.entries(), restricted.entries());
}

#[test]
fn a1_fo_bracket_only_pairs_ratios_with_positions() {
    let mp = tau_i();
    let p = reduced("A1", &[4], ChartKind::Zastava);
    let m = fo_reduced_bracket_matrix(&p, &mp).unwrap();
    let labels = m.labels().to_vec();
    for (a, la) in labels.iter().enumerate() {
        for (b, lb) in labels.iter().enumerate() {
            let expected = match (la.kind, lb.kind) {
                (CoordKind::YRatio, CoordKind::W) if la.index == lb.index => p.ratio(0)[la.index],
                (CoordKind::W, CoordKind::YRatio) if la.index == lb.index => -p.ratio(0)[lb.index],
                _ => c(0.0, 0.0),
            };
            assert_eq!(m.get(a, b), expected, "{la} vs {lb}");
        }
    }
}

#[test]
fn fo_entries_of_two_colors_ignore_the_other_colors() {
    let mp = tau_i();
    let p = reduced("D4", &[2, 2, 2, 2], ChartKind::Zastava);
    let base = fo_reduced_bracket_matrix(&p, &mp).unwrap();

    let mut w = p.full_w_all();
    w[2][0] += c(0.031, -0.017);
    w[3][1] += c(-0.022, 0.045);
    let mut y = p.ratios().to_vec();
    y[3][0] *= c(1.3, 0.4);
    let q = ReducedChartPoint::from_full_w(p.quiver().clone(), p.alpha().clone(), ChartKind::Zastava, w, y).unwrap();
    let moved = fo_reduced_bracket_matrix(&q, &mp).unwrap();

    let labels = base.labels();
    for a in 0..base.dim() {
        for b in 0..base.dim() {
            if labels[a].vertex < 2 && labels[b].vertex < 2 {
                assert_eq!(base.get(a, b), moved.get(a, b));
            }
        }
    }
}

/// The reduced Coulomb bracket is the bracket induced on torus-invariant
/// functions: `Z_r = z_r / z_a` and the free `w_r`, computed by the chain rule
/// from the unreduced chart.
#[test]
fn coulomb_reduction_matches_the_invariant_function_bracket() {
    let alpha = [3u32, 2, 2];
    let q = Quiver::named("A3").unwrap();
    let d = Degree::new(alpha.to_vec()).unwrap();
    let fibers: Vec<Vec<Complex64>> = alpha
        .iter()
        .enumerate()
        .map(|(i, &a)| (0..a).map(|r| c(1.1 + 0.3 * r as f64, 0.2 * i as f64 - 0.4)).collect())
        .collect();
    let full = UnreducedChartPoint::new(q.clone(), d.clone(), ChartKind::Coulomb, positions(&alpha, 0.0), fibers.clone())
        .unwrap();
    let big = coulomb_bracket_matrix(&full).unwrap();

    let ratio: Vec<Vec<Complex64>> = fibers
        .iter()
        .map(|z| z[..z.len() - 1].iter().map(|x| x / z[z.len() - 1]).collect())
        .collect();
    let red = ReducedChartPoint::from_full_w(q, d, ChartKind::Coulomb, positions(&alpha, 0.0), ratio).unwrap();
    let small = coulomb_reduced_bracket_matrix(&red).unwrap();

    // Rows: gradients of the reduced coordinates in unreduced coordinates.
    let n = full.dim();
    let grads: Vec<Vec<Complex64>> = small
        .labels()
        .iter()
        .map(|l| {
            let mut g = vec![c(0.0, 0.0); n];
            let (i, r) = (l.vertex, l.index);
            match l.kind {
                CoordKind::W => g[full.w_slot(i, r)] = c(1.0, 0.0),
                _ => {
                    let z = full.fiber(i);
                    let last = z.len() - 1;
                    g[full.fiber_slot(i, r)] = 1.0 / z[last];
                    g[full.fiber_slot(i, last)] = -z[r] / (z[last] * z[last]);
                }
            }
            g
        })
        .collect();
    for (a, ga) in grads.iter().enumerate() {
        for (b, gb) in grads.iter().enumerate() {
            let mut v = c(0.0, 0.0);
            for (k, x) in ga.iter().enumerate() {
                for (l, y) in gb.iter().enumerate() {
                    v += x * big.get(k, l) * y;
                }
            }
            assert!((v - small.get(a, b)).norm() < 1e-14, "({a}, {b}): {v} vs {}", small.get(a, b));
        }
    }
}

fn spec_for(p: &ReducedChartPoint) -> TransformSpec {
    TransformSpec::new(p.quiver().clone(), p.alpha().clone(), tau_i()).unwrap()
}

#[test]
fn psi_depends_only_on_the_color_and_its_arrow_targets() {
    let p = reduced("A3", &[2, 2, 2], ChartKind::Coulomb);
    let spec = spec_for(&p);
    let perturb = |color: usize| {
        let mut w = p.full_w_all();
        w[color][0] += c(0.027, 0.011);
        ReducedChartPoint::from_full_w(p.quiver().clone(), p.alpha().clone(), ChartKind::Coulomb, w, p.ratios().to_vec())
            .unwrap()
    };
    // Arrows are 1 -> 2 -> 3.
    let far = perturb(2);
    for r in 0..2 {
        assert_eq!(psi_factor(&spec, 0, r, &p).unwrap(), psi_factor(&spec, 0, r, &far).unwrap());
    }
    let before = perturb(0);
    for r in 0..2 {
        assert_eq!(psi_factor(&spec, 1, r, &p).unwrap(), psi_factor(&spec, 1, r, &before).unwrap());
        assert_eq!(psi_factor(&spec, 2, r, &p).unwrap(), c(1.0, 0.0));
    }
}

#[test]
fn analytic_jacobian_matches_finite_differences() {
    let p = reduced("A3", &[2, 1, 2], ChartKind::Coulomb);
    let spec = spec_for(&p);
    let jac = transform_jacobian(&spec, &p).unwrap();
    let x = p.coords();
    let n = x.len();
    let h = 1e-5;
    for col in 0..n {
        let shifted = |s: f64| {
            let mut xs = x.clone();
            xs[col] += s;
            zastava_from_coulomb(&spec, &p.with_coords(&xs).unwrap()).unwrap().coords()
        };
        let (fp, fm) = (shifted(h), shifted(-h));
        for row in 0..n {
            let fd = (fp[row] - fm[row]) / (2.0 * h);
            let exact = jac[row * n + col];
            let err = (fd - exact).norm() / exact.norm().max(1.0);
            assert!(err < 1e-6, "J[{row}][{col}]: {fd} vs {exact}");
        }
    }
}

#[test]
fn pushforward_equals_fo_bracket_for_higher_degrees() {
    let mp = tau_i();
    let p = reduced("A3", &[1, 2, 3], ChartKind::Coulomb);
    let spec = spec_for(&p);
    let pushed = pushforward_bracket(&spec, &p).unwrap();
    let image = zastava_from_coulomb(&spec, &p).unwrap();
    let fo = fo_reduced_bracket_matrix(&image, &mp).unwrap();
    assert_eq!(pushed.labels(), fo.labels());
    assert!(relative_distance(&pushed, &fo) < 1e-10);
}

fn relative_distance(a: &BracketMatrix, b: &BracketMatrix) -> f64 {
    let scale = b.max_abs().max(1.0);
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm() / scale)
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trips(shift in -0.3f64..0.3, re in 0.2f64..3.0, im in -2.0f64..2.0) {
        let alpha = [2u32, 2];
        let q = Quiver::named("A2").unwrap();
        let d = Degree::new(alpha.to_vec()).unwrap();
        let ratio = vec![vec![c(re, im)], vec![c(im, re)]];
        let p = ReducedChartPoint::from_full_w(q, d, ChartKind::Coulomb, positions(&alpha, shift), ratio).unwrap();
        let spec = spec_for(&p);
        let back = coulomb_from_zastava(&spec, &zastava_from_coulomb(&spec, &p).unwrap()).unwrap();
        for (x, y) in p.coords().iter().zip(back.coords()) {
            prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
        }
    }

    #[test]
    fn fo_bracket_is_antisymmetric(shift in -0.4f64..0.4) {
        let alpha = [2u32, 1, 2];
        let q = Quiver::named("A3").unwrap();
        let d = Degree::new(alpha.to_vec()).unwrap();
        let p = ReducedChartPoint::from_full_w(q, d, ChartKind::Zastava, positions(&alpha, shift), ratios(&alpha)).unwrap();
        let m = fo_reduced_bracket_matrix(&p, &tau_i()).unwrap();
        prop_assert_eq!(m.antisymmetry_residual(), 0.0);
    }
}
