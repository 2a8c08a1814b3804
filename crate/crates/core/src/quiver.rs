//! Simply-laced Dynkin quivers, degree vectors and the Cartan pairing.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a quiver must be a disjoint union of ADE Dynkin diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuiverMode {
    #[default]
    Strict,
    /// Any simple oriented graph. The bracket formulas still make sense but
    /// the geometric statements behind them no longer apply.
    Permissive,
}

/// An oriented simply-laced graph: vertices `I` and arrows `Q1`.
///
/// Vertex ids are opaque strings; everything else is indexed by the declared
/// vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<(usize, usize)>,
    mode: QuiverMode,
}

/// The Dynkin type of a connected component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynkinType {
    A(usize),
    D(usize),
    E(usize),
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynkinType::A(n) => write!(f, "A{n}"),
            DynkinType::D(n) => write!(f, "D{n}"),
            DynkinType::E(n) => write!(f, "E{n}"),
        }
    }
}

impl Quiver {
    /// Builds a quiver from vertex ids and `(source, target)` arrows.
    pub fn new<S: AsRef<str>>(vertices: &[S], arrows: &[(S, S)], mode: QuiverMode) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let lookup = |id: &str| {
            vertices
                .iter()
                .position(|v| v == id)
                .ok_or_else(|| Error::UnknownVertex(id.to_string()))
        };
        let arrows = arrows
            .iter()
            .map(|(s, t)| Ok((lookup(s.as_ref())?, lookup(t.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(vertices, arrows, mode)
    }

    pub fn from_indices(vertices: Vec<String>, arrows: Vec<(usize, usize)>, mode: QuiverMode) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidQuiver("no vertices".into()));
        }
        for (k, v) in vertices.iter().enumerate() {
            if vertices[..k].contains(v) {
                return Err(Error::InvalidQuiver(format!("duplicate vertex `{v}`")));
            }
        }
        for (k, &(s, t)) in arrows.iter().enumerate() {
            if s >= vertices.len() || t >= vertices.len() {
                return Err(Error::InvalidQuiver(format!("arrow {k} refers to a missing vertex")));
            }
            if s == t {
                return Err(Error::InvalidQuiver(format!("loop at vertex `{}`", vertices[s])));
            }
            let dup = arrows[..k]
                .iter()
                .any(|&(a, b)| (a, b) == (s, t) || (a, b) == (t, s));
            if dup {
                return Err(Error::InvalidQuiver(format!(
                    "more than one arrow between `{}` and `{}`",
                    vertices[s], vertices[t]
                )));
            }
        }
        let quiver = Quiver { vertices, arrows, mode };
        if mode == QuiverMode::Strict {
            quiver.dynkin_components()?;
        }
        Ok(quiver)
    }

    /// A named Dynkin quiver (`A1`..`A8`, `D4`..`D8`, `E6`..`E8`).
    ///
    /// Vertices are `"1"`, `"2"`, ...; every edge points from the smaller to
    /// the larger label, so vertex 1 is a source and the chain ends in sinks.
    /// For `E_n` the branch vertex is 3 and the extra vertex is `n`.
    pub fn named(name: &str) -> Result<Self> {
        let bad = || Error::InvalidQuiver(format!("unknown Dynkin type `{name}`"));
        let trimmed = name.trim();
        let (kind, rank) = trimmed.split_at(1.min(trimmed.len()));
        let rank: usize = rank.parse().map_err(|_| bad())?;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        match (kind, rank) {
            ("A", 1..=8) => edges.extend((1..rank).map(|k| (k - 1, k))),
            ("D", 4..=8) => {
                edges.extend((1..rank - 2).map(|k| (k - 1, k)));
                edges.push((rank - 3, rank - 2));
                edges.push((rank - 3, rank - 1));
            }
            ("E", 6..=8) => {
                edges.extend((1..rank - 1).map(|k| (k - 1, k)));
                edges.push((2, rank - 1));
            }
            _ => return Err(bad()),
        }
        let vertices = (1..=rank).map(|k| k.to_string()).collect();
        Self::from_indices(vertices, edges, QuiverMode::Strict)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    pub fn mode(&self) -> QuiverMode {
        self.mode
    }

    pub fn rank(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v == id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.arrows.iter().any(|&(s, t)| (s, t) == (i, j) || (s, t) == (j, i))
    }

    /// Heads of the arrows leaving vertex `i`.
    pub fn outgoing(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.arrows.iter().filter(move |a| a.0 == i).map(|a| a.1)
    }

    /// `(alpha_i, alpha_j)`: 2 on the diagonal, -1 for neighbours, 0 otherwise.
    pub fn cartan_entry(&self, i: usize, j: usize) -> i32 {
        if i == j {
            2
        } else if self.adjacent(i, j) {
            -1
        } else {
            0
        }
    }

    pub fn cartan_pairing(&self, i: &str, j: &str) -> Result<i32> {
        Ok(self.cartan_entry(self.index_of(i)?, self.index_of(j)?))
    }

    pub fn cartan_matrix(&self) -> Vec<Vec<i32>> {
        (0..self.rank())
            .map(|i| (0..self.rank()).map(|j| self.cartan_entry(i, j)).collect())
            .collect()
    }

    /// The full subquiver on the given vertex indices, in the given order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Quiver> {
        let vertices = keep.iter().map(|&k| self.vertices[k].clone()).collect();
        let arrows = self
            .arrows
            .iter()
            .filter_map(|&(s, t)| {
                let s = keep.iter().position(|&k| k == s)?;
                let t = keep.iter().position(|&k| k == t)?;
                Some((s, t))
            })
            .collect();
        Self::from_indices(vertices, arrows, self.mode)
    }

    fn neighbours(&self, i: usize) -> Vec<usize> {
        self.arrows
            .iter()
            .filter_map(|&(s, t)| {
                if s == i {
                    Some(t)
                } else if t == i {
                    Some(s)
                } else {
                    None
                }
            })
            .collect()
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.rank()];
        let mut out = Vec::new();
        for start in 0..self.rank() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for u in self.neighbours(v) {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Classifies every connected component as an ADE diagram.
    pub fn dynkin_components(&self) -> Result<Vec<DynkinType>> {
        self.components()
            .into_iter()
            .map(|comp| self.classify(&comp))
            .collect()
    }

    fn classify(&self, comp: &[usize]) -> Result<DynkinType> {
        let n = comp.len();
        let edges = self
            .arrows
            .iter()
            .filter(|(s, _)| comp.contains(s))
            .count();
        let describe = || comp.iter().map(|&v| self.vertices[v].as_str()).collect::<Vec<_>>().join(",");
        if edges != n - 1 {
            return Err(Error::InvalidQuiver(format!(
                "component {{{}}} contains a cycle",
                describe()
            )));
        }
        let degrees: Vec<usize> = comp.iter().map(|&v| self.neighbours(v).len()).collect();
        let branches: Vec<usize> = comp
            .iter()
            .zip(&degrees)
            .filter(|(_, &d)| d >= 3)
            .map(|(&v, _)| v)
            .collect();
        if branches.is_empty() {
            return Ok(DynkinType::A(n));
        }
        if branches.len() > 1 || degrees.iter().any(|&d| d > 3) {
            return Err(Error::InvalidQuiver(format!(
                "component {{{}}} is not a Dynkin diagram",
                describe()
            )));
        }
        let center = branches[0];
        let mut arms: Vec<usize> = self
            .neighbours(center)
            .into_iter()
            .map(|start| {
                let (mut prev, mut cur, mut len) = (center, start, 1);
                loop {
                    let next: Vec<usize> = self.neighbours(cur).into_iter().filter(|&u| u != prev).collect();
                    match next.as_slice() {
                        [u] => {
                            prev = cur;
                            cur = *u;
                            len += 1;
                        }
                        _ => break len,
                    }
                }
            })
            .collect();
        arms.sort_unstable();
        match arms.as_slice() {
            [1, 1, r] => Ok(DynkinType::D(r + 3)),
            [1, 2, 2] => Ok(DynkinType::E(6)),
            [1, 2, 3] => Ok(DynkinType::E(7)),
            [1, 2, 4] => Ok(DynkinType::E(8)),
            _ => Err(Error::InvalidQuiver(format!(
                "component {{{}}} with arms {arms:?} is not a Dynkin diagram",
                describe()
            ))),
        }
    }
}

/// A degree `alpha = sum a_i alpha_i`, stored in the quiver's vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Degree {
    a: Vec<u32>,
}

impl Degree {
    /// A degree with `|alpha| >= 1`.
    pub fn new(a: Vec<u32>) -> Result<Self> {
        if a.iter().all(|&x| x == 0) {
            return Err(Error::InvalidDegree("total degree must be at least 1".into()));
        }
        Ok(Degree { a })
    }

    /// A sub-degree `beta <= alpha`; zero is allowed.
    pub fn sub(a: Vec<u32>) -> Self {
        Degree { a }
    }

    pub fn zero(rank: usize) -> Self {
        Degree { a: vec![0; rank] }
    }

    /// Builds a degree from a vertex-id map; missing vertices get zero.
    pub fn from_map(quiver: &Quiver, map: &BTreeMap<String, u32>) -> Result<Self> {
        let mut a = vec![0; quiver.rank()];
        for (k, v) in map {
            a[quiver.index_of(k)?] = *v;
        }
        Self::new(a)
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.a
    }

    pub fn get(&self, i: usize) -> u32 {
        self.a[i]
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `|alpha| = sum a_i`.
    pub fn total(&self) -> u32 {
        self.a.iter().sum()
    }

    /// Every coefficient positive, as the reduced charts require.
    pub fn is_reduction_admissible(&self) -> bool {
        self.a.iter().all(|&x| x >= 1)
    }

    pub fn check_matches(&self, quiver: &Quiver) -> Result<()> {
        if self.a.len() != quiver.rank() {
            return Err(Error::DegreeMismatch(format!(
                "degree has {} coefficients but the quiver has {} vertices",
                self.a.len(),
                quiver.rank()
            )));
        }
        Ok(())
    }

    pub fn le(&self, other: &Degree) -> bool {
        self.a.len() == other.a.len() && self.a.iter().zip(&other.a).all(|(b, a)| b <= a)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.a)
    }
}

/// All `beta <= alpha` componentwise, in lexicographic order.
pub fn enumerate_subdegrees(alpha: &Degree) -> Vec<Degree> {
    let mut out = vec![Vec::with_capacity(alpha.len())];
    for &a in alpha.coefficients() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=a).map(move |b| {
                    let mut v = prefix.clone();
                    v.push(b);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(Degree::sub).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> Quiver {
        Quiver::new(&["i", "j"], &[("i", "j")], QuiverMode::Strict).unwrap()
    }

    #[test]
    fn cartan_pairing_examples() {
        let q = a2();
        assert_eq!(q.cartan_pairing("i", "i").unwrap(), 2);
        assert_eq!(q.cartan_pairing("i", "j").unwrap(), -1);
        assert_eq!(q.cartan_pairing("j", "i").unwrap(), -1);
        let q = Quiver::new::<&str>(&["i", "j"], &[], QuiverMode::Strict).unwrap();
        assert_eq!(q.cartan_pairing("i", "j").unwrap(), 0);
        assert!(matches!(q.cartan_pairing("i", "k"), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn named_types_classify() {
        for (name, ty) in [
            ("A1", DynkinType::A(1)),
            ("A5", DynkinType::A(5)),
            ("D4", DynkinType::D(4)),
            ("D7", DynkinType::D(7)),
            ("E6", DynkinType::E(6)),
            ("E7", DynkinType::E(7)),
            ("E8", DynkinType::E(8)),
        ] {
            let q = Quiver::named(name).unwrap();
            assert_eq!(q.dynkin_components().unwrap(), vec![ty], "{name}");
            let m = q.cartan_matrix();
            for (i, row) in m.iter().enumerate() {
                assert_eq!(row[i], 2);
                for (j, &entry) in row.iter().enumerate() {
                    assert_eq!(entry, m[j][i]);
                }
            }
        }
        assert!(Quiver::named("A9").is_err());
        assert!(Quiver::named("D3").is_err());
        assert!(Quiver::named("F4").is_err());
    }

    #[test]
    fn strict_mode_rejects_non_dynkin() {
        let tri = [("a", "b"), ("b", "c"), ("c", "a")];
        assert!(matches!(
            Quiver::new(&["a", "b", "c"], &tri, QuiverMode::Strict),
            Err(Error::InvalidQuiver(_))
        ));
        assert!(Quiver::new(&["a", "b", "c"], &tri, QuiverMode::Permissive).is_ok());
        // Affine D4: a vertex of degree four.
        let star = [("c", "1"), ("c", "2"), ("c", "3"), ("c", "4")];
        assert!(Quiver::new(&["c", "1", "2", "3", "4"], &star, QuiverMode::Strict).is_err());
        // Affine E6: arms (2, 2, 2).
        let e6_affine = [("c", "a1"), ("a1", "a2"), ("c", "b1"), ("b1", "b2"), ("c", "d1"), ("d1", "d2")];
        let v = ["c", "a1", "a2", "b1", "b2", "d1", "d2"];
        assert!(Quiver::new(&v, &e6_affine, QuiverMode::Strict).is_err());
    }

    #[test]
    fn malformed_arrows() {
        assert!(Quiver::new(&["a"], &[("a", "a")], QuiverMode::Permissive).is_err());
        assert!(Quiver::new(&["a", "b"], &[("a", "b"), ("b", "a")], QuiverMode::Permissive).is_err());
        assert!(matches!(
            Quiver::new(&["a", "b"], &[("a", "x")], QuiverMode::Strict),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn disjoint_union_is_dynkin() {
        let q = Quiver::new(&["a", "b", "c"], &[("a", "b")], QuiverMode::Strict).unwrap();
        assert_eq!(q.dynkin_components().unwrap(), vec![DynkinType::A(2), DynkinType::A(1)]);
    }

    #[test]
    fn subdegree_counts() {
        let count = |a: Vec<u32>| enumerate_subdegrees(&Degree::new(a).unwrap()).len();
        assert_eq!(count(vec![2]), 3);
        assert_eq!(count(vec![1, 1]), 4);
        assert_eq!(count(vec![2, 1]), 6);
        let subs = enumerate_subdegrees(&Degree::new(vec![1, 1]).unwrap());
        let raw: Vec<_> = subs.iter().map(|d| d.coefficients().to_vec()).collect();
        assert_eq!(raw, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn degree_validation() {
        assert!(Degree::new(vec![0, 0]).is_err());
        assert!(!Degree::new(vec![0, 2]).unwrap().is_reduction_admissible());
        assert!(Degree::new(vec![1, 2]).unwrap().is_reduction_admissible());
        let q = a2();
        let mut map = BTreeMap::new();
        map.insert("j".to_string(), 3);
        assert_eq!(Degree::from_map(&q, &map).unwrap().coefficients(), &[0, 3]);
    }

    #[test]
    fn restriction_keeps_full_subquiver() {
        let d4 = Quiver::named("D4").unwrap();
        let sub = d4.restrict(&[0, 1]).unwrap();
        assert_eq!(sub.arrows(), &[(0, 1)]);
        let sub = d4.restrict(&[2, 3]).unwrap();
        assert!(sub.arrows().is_empty());
    }
}
