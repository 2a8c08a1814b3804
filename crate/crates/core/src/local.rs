//! Integer shadows of the factorizable bundles over colored configurations,
//! the Segre coordinates of a product of projective lines, and the A2 local
//! model near a cross-color diagonal.

use num_complex::Complex64;
use serde::Serialize;

use crate::charts::{rational_bracket_matrix, ChartKind, UnreducedChartPoint};
use crate::error::{Error, Result};
use crate::quiver::{Degree, Quiver};

/// A colored configuration: positions `w_{i,r}` grouped into clusters of
/// points closer than `delta` (transitive closure).
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    quiver: Quiver,
    alpha: Degree,
    points: Vec<Vec<Complex64>>,
    delta: f64,
    clusters: Vec<Vec<(usize, usize)>>,
}

impl Configuration {
    pub fn new(quiver: Quiver, alpha: Degree, points: Vec<Vec<Complex64>>, delta: f64) -> Result<Self> {
        alpha.check_matches(&quiver)?;
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("clustering threshold must be finite and >= 0, got {delta}")));
        }
        let found = points.iter().map(Vec::len).collect::<Vec<_>>();
        let expected = alpha.coefficients().iter().map(|&a| a as usize).collect::<Vec<_>>();
        if found != expected {
            return Err(Error::InvalidPoint(format!(
                "expected {expected:?} points per vertex, got {found:?}"
            )));
        }
        if points.iter().flatten().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::InvalidPoint("positions must be finite".into()));
        }
        let clusters = cluster(&points, delta);
        Ok(Configuration {
            quiver,
            alpha,
            points,
            delta,
            clusters,
        })
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn alpha(&self) -> &Degree {
        &self.alpha
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Clusters as lists of `(vertex, index)`, ordered by their first member.
    pub fn clusters(&self) -> &[Vec<(usize, usize)>] {
        &self.clusters
    }

    /// The colored degree carried by each cluster.
    pub fn cluster_degrees(&self) -> Vec<Degree> {
        self.clusters
            .iter()
            .map(|c| {
                let mut a = vec![0; self.quiver.rank()];
                for &(i, _) in c {
                    a[i] += 1;
                }
                Degree::sub(a)
            })
            .collect()
    }

    /// No two points collide.
    pub fn is_generic(&self) -> bool {
        self.clusters.iter().all(|c| c.len() == 1)
    }
}

fn cluster(points: &[Vec<Complex64>], delta: f64) -> Vec<Vec<(usize, usize)>> {
    let flat: Vec<(usize, usize, Complex64)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, ws)| ws.iter().enumerate().map(move |(r, &w)| (i, r, w)))
        .collect();
    let mut parent: Vec<usize> = (0..flat.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..flat.len() {
        for b in a + 1..flat.len() {
            if (flat[a].2 - flat[b].2).norm() < delta {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                // keep the smaller root so cluster order follows the flat order
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi] = lo;
            }
        }
    }
    let mut out: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut slot = vec![usize::MAX; flat.len()];
    for (k, &(i, r, _)) in flat.iter().enumerate() {
        let root = find(&mut parent, k);
        if slot[root] == usize::MAX {
            slot[root] = out.len();
            out.push(Vec::new());
        }
        out[slot[root]].push((i, r));
    }
    out
}

fn binomial(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, t| acc * u128::from(n - t) / u128::from(t + 1))
}

/// Rank of the `beta`-summand: `prod_i C(a_i, b_i)`.
pub fn mirkovic_summand_rank(alpha: &Degree, beta: &Degree) -> Result<u128> {
    check_sub(alpha, beta)?;
    alpha
        .coefficients()
        .iter()
        .zip(beta.coefficients())
        .try_fold(1u128, |acc, (&a, &b)| acc.checked_mul(binomial(a, b)))
        .ok_or_else(|| Error::InvalidArgument(format!("summand rank of {alpha} overflows")))
}

fn check_sub(alpha: &Degree, beta: &Degree) -> Result<()> {
    if alpha.len() != beta.len() {
        return Err(Error::DegreeMismatch(format!(
            "degrees have {} and {} coefficients",
            alpha.len(),
            beta.len()
        )));
    }
    for (v, (&a, &b)) in alpha.coefficients().iter().zip(beta.coefficients()).enumerate() {
        if b > a {
            return Err(Error::DegreeOverflow { vertex: v, sub: b, bound: a });
        }
    }
    Ok(())
}

fn check_pair(quiver: &Quiver, beta: &Degree, gamma: &Degree) -> Result<()> {
    for d in [beta, gamma] {
        if d.len() != quiver.rank() {
            return Err(Error::DegreeMismatch(format!(
                "degree {d} has {} coefficients, the quiver has {} vertices",
                d.len(),
                quiver.rank()
            )));
        }
    }
    Ok(())
}

/// `sum_h b_{o(h)} c_{i(h)}`, the degree of the cross-color twist of the
/// Coulomb bundle.
pub fn coulomb_twist_degree(quiver: &Quiver, beta: &Degree, gamma: &Degree) -> Result<i64> {
    check_pair(quiver, beta, gamma)?;
    Ok(quiver
        .arrows()
        .iter()
        .map(|&(o, i)| i64::from(beta.get(o)) * i64::from(gamma.get(i)))
        .sum())
}

/// `sum_i b_i (b_i - 1) - sum_h b_{o(h)} b_{i(h)} + sum_i b_i c_i`.
pub fn mirkovic_twist_degree(quiver: &Quiver, beta: &Degree, gamma: &Degree) -> Result<i64> {
    check_pair(quiver, beta, gamma)?;
    let b = |i: usize| i64::from(beta.get(i));
    let c = |i: usize| i64::from(gamma.get(i));
    let same: i64 = (0..quiver.rank()).map(|i| b(i) * (b(i) - 1)).sum();
    let cross: i64 = quiver.arrows().iter().map(|&(o, i)| b(o) * b(i)).sum();
    let mixed: i64 = (0..quiver.rank()).map(|i| b(i) * c(i)).sum();
    Ok(same - cross + mixed)
}

/// Subset-indexed coordinates `s_S`, `S` a bitmask over the flattened
/// `(vertex, index)` order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegreVector {
    index: Vec<(usize, usize)>,
    #[serde(serialize_with = "crate::verify::serialize_complex_vec")]
    entries: Vec<Complex64>,
}

impl SegreVector {
    /// Entries for the subsets of `index`, bitmask order; `entries[0]` must be 1.
    pub fn new(index: Vec<(usize, usize)>, entries: Vec<Complex64>) -> Result<Self> {
        if index.len() >= usize::BITS as usize - 1 {
            return Err(Error::InvalidArgument("too many factors".into()));
        }
        let expected = 1usize << index.len();
        if entries.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: entries.len(),
            });
        }
        if entries[0] != Complex64::new(1.0, 0.0) {
            return Err(Error::InvalidArgument("the empty-subset entry must be 1".into()));
        }
        Ok(SegreVector { index, entries })
    }

    pub fn index(&self) -> &[(usize, usize)] {
        &self.index
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, subset: usize) -> Complex64 {
        self.entries[subset]
    }

    pub fn factors(&self) -> usize {
        self.index.len()
    }
}

/// `s_S = prod_{(i,r) in S} values[i][r]`, multiplied in flattened order.
pub fn segre_embed(values: &[Vec<Complex64>]) -> SegreVector {
    let index: Vec<(usize, usize)> = values
        .iter()
        .enumerate()
        .flat_map(|(i, vs)| (0..vs.len()).map(move |r| (i, r)))
        .collect();
    let flat: Vec<Complex64> = values.iter().flatten().copied().collect();
    let mut entries = vec![Complex64::new(1.0, 0.0); 1 << flat.len()];
    for mask in 1..entries.len() {
        let top = usize::BITS - 1 - mask.leading_zeros();
        entries[mask] = entries[mask & !(1 << top)] * flat[top as usize];
    }
    SegreVector { index, entries }
}

/// Largest violation of the multiplicativity relations
/// `s_S = prod_{k in S} s_{k}` and of the exchange relations
/// `s_{S+a} s_{S+b} = s_S s_{S+a+b}`.
///
/// Products are evaluated in the same order as [`segre_embed`], so embedded
/// vectors give exactly zero on the first family. On the exchange relations
/// the rounding of the two products is forgiven, up to a few ulps of their
/// magnitudes.
pub fn segre_residual(v: &SegreVector) -> f64 {
    let n = v.factors();
    let e = &v.entries;
    let mut worst: f64 = 0.0;
    for mask in 1..e.len() {
        let mut prod = Complex64::new(1.0, 0.0);
        for k in 0..n {
            if mask & (1 << k) != 0 {
                prod *= e[1 << k];
            }
        }
        worst = worst.max((e[mask] - prod).norm());
    }
    let slack = 8.0 * f64::EPSILON;
    for mask in 0..e.len() {
        for a in 0..n {
            if mask & (1 << a) != 0 {
                continue;
            }
            for b in a + 1..n {
                if mask & (1 << b) != 0 {
                    continue;
                }
                let lhs = e[mask | 1 << a] * e[mask | 1 << b];
                let rhs = e[mask] * e[mask | 1 << a | 1 << b];
                let allowance = slack * (lhs.norm() + rhs.norm());
                worst = worst.max(((lhs - rhs).norm() - allowance).max(0.0));
            }
        }
    }
    worst
}

/// Output of [`a2_local_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A2LocalPoint {
    /// `y_ij = y_i y_j / (w1 - w2)`.
    pub y_ij: Complex64,
    /// The rational-chart bracket `{y_i, y_j}`.
    pub bracket: Complex64,
    /// `{y_i, y_j} / ((alpha_i, alpha_j) y_ij)`.
    pub regularity: Complex64,
}

/// Solves `y_i y_j = y_ij (w1 - w2)` on the A2 chart and compares the
/// rational bracket `{y_i, y_j}` against `(alpha_i, alpha_j) y_ij`.
pub fn a2_local_model(w1: Complex64, w2: Complex64, y_i: Complex64, y_j: Complex64) -> Result<A2LocalPoint> {
    let diff = w1 - w2;
    let distance = diff.norm();
    if distance == 0.0 {
        return Err(Error::DiagonalPoint { distance });
    }
    let quiver = Quiver::named("A2")?;
    let pairing = f64::from(quiver.cartan_entry(0, 1));
    let point = UnreducedChartPoint::new(
        quiver,
        Degree::new(vec![1, 1])?,
        ChartKind::Zastava,
        vec![vec![w1], vec![w2]],
        vec![vec![y_i], vec![y_j]],
    )?
    .with_separation(0.0);
    let bracket = rational_bracket_matrix(&point)?.get(point.fiber_slot(0, 0), point.fiber_slot(1, 0));
    let y_ij = (y_i * y_j) * diff.inv();
    let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
    if !finite(y_ij) || !finite(bracket) || y_ij.norm() == 0.0 {
        return Err(Error::DiagonalPoint { distance });
    }
    Ok(A2LocalPoint {
        y_ij,
        bracket,
        regularity: bracket / (pairing * y_ij),
    })
}
