//! Brute-force maximum orthogonal families inside bounded zero-lattice pools.

use std::collections::HashSet;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::construct::{verify_with, BizeroReport, FrequencySet};
use crate::linalg::{Mat2, Vec2};
use crate::model::{MeasureInstance, ZeroLattice};
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidatePool {
    pub frequencies: Vec<Vec2>,
    pub kmax: u64,
    pub radius: i64,
    /// Deepest construction depth among seeded points, if any.
    pub seed_depth: Option<u64>,
}

impl CandidatePool {
    /// Adds points (deduplicated, 0 skipped) and records their depth.
    pub fn seed(&mut self, extra: &FrequencySet) {
        let mut seen: HashSet<Vec2> = self.frequencies.iter().cloned().collect();
        for v in &extra.points {
            if !v.is_zero() && seen.insert(v.clone()) {
                self.frequencies.push(v.clone());
            }
        }
        self.seed_depth = Some(self.seed_depth.unwrap_or(0).max(extra.depth));
    }

    /// Membership depth used for edges.
    pub fn edge_kmax(&self) -> u64 {
        let base = 2 * self.kmax + 2;
        self.seed_depth.map_or(base, |d| base.max(2 * d + 2))
    }
}

/// ∪_{1≤k≤kmax} ∪_j (M*)^k (ja/p + z), z ∈ [−radius, radius]².
pub fn enumerate_candidates(
    inst: &MeasureInstance,
    a: (i64, i64),
    kmax: u64,
    radius: i64,
) -> CandidatePool {
    let p = inst.p() as i64;
    let mstar = inst.m.adjoint();
    let mut seen = HashSet::new();
    let mut frequencies = Vec::new();
    let mut mk = Mat2::identity();
    for _ in 0..kmax {
        mk = mk.mul(&mstar);
        for j in 1..p {
            for z1 in -radius..=radius {
                for z2 in -radius..=radius {
                    let v = Vec2::from_rationals(
                        Rational::new(BigInt::from(j * a.0 + p * z1), BigInt::from(p)),
                        Rational::new(BigInt::from(j * a.1 + p * z2), BigInt::from(p)),
                    );
                    let w = mk.apply(&v);
                    if !w.is_zero() && seen.insert(w.clone()) {
                        frequencies.push(w);
                    }
                }
            }
        }
    }
    CandidatePool {
        frequencies,
        kmax,
        radius,
        seed_depth: None,
    }
}

/// Undirected graph on bitset rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            return;
        }
        self.rows[u * self.words + v / 64] |= 1 << (v % 64);
        self.rows[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.rows[u * self.words..(u + 1) * self.words]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }
}

fn first(set: &[u64]) -> Option<usize> {
    set.iter()
        .position(|&w| w != 0)
        .map(|i| i * 64 + set[i].trailing_zeros() as usize)
}

fn count(set: &[u64]) -> usize {
    set.iter().map(|w| w.count_ones() as usize).sum()
}

struct Solver<'a> {
    g: &'a Graph,
    best: Vec<usize>,
    current: Vec<usize>,
}

impl Solver<'_> {
    /// Greedy colouring of `cand`; returns vertices in colour order with their colour numbers.
    fn colour(&self, cand: &[u64]) -> Vec<(usize, usize)> {
        let mut left = cand.to_vec();
        let mut out = Vec::with_capacity(count(cand));
        let mut colour = 0;
        while count(&left) > 0 {
            colour += 1;
            let mut avail = left.clone();
            while let Some(v) = first(&avail) {
                out.push((v, colour));
                left[v / 64] &= !(1 << (v % 64));
                avail[v / 64] &= !(1 << (v % 64));
                for (a, r) in avail.iter_mut().zip(self.g.row(v)) {
                    *a &= !r;
                }
            }
        }
        out
    }

    fn expand(&mut self, mut cand: Vec<u64>) {
        let order = self.colour(&cand);
        for &(v, c) in order.iter().rev() {
            if self.current.len() + c <= self.best.len() {
                return;
            }
            self.current.push(v);
            let next: Vec<u64> = cand.iter().zip(self.g.row(v)).map(|(a, b)| a & b).collect();
            if count(&next) == 0 {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else {
                self.expand(next);
            }
            self.current.pop();
            cand[v / 64] &= !(1 << (v % 64));
        }
    }
}

/// A maximum clique (vertex indices, ascending). Branch and bound with colour bounds.
pub fn max_clique(g: &Graph) -> Vec<usize> {
    if g.n == 0 {
        return Vec::new();
    }
    let mut cand = vec![0u64; g.words];
    for v in 0..g.n {
        cand[v / 64] |= 1 << (v % 64);
    }
    let mut s = Solver {
        g,
        best: vec![0],
        current: Vec::new(),
    };
    s.expand(cand);
    let mut best = s.best;
    best.sort_unstable();
    best
}

/// Orthogonality graph: vertex 0 is the zero frequency, the rest follow the pool.
pub struct OrthogonalityGraph {
    pub vertices: Vec<Vec2>,
    pub graph: Graph,
    pub kmax: u64,
}

pub fn orthogonality_graph(lattice: &ZeroLattice, pool: &[Vec2], kmax: u64) -> OrthogonalityGraph {
    let mut vertices = vec![Vec2::zero()];
    let mut seen: HashSet<Vec2> = vertices.iter().cloned().collect();
    for v in pool {
        if seen.insert(v.clone()) {
            vertices.push(v.clone());
        }
    }
    let n = vertices.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let edges: Vec<(usize, usize)> = pairs
        .into_par_iter()
        .filter(|&(i, j)| {
            lattice
                .member(&vertices[j].sub(&vertices[i]), kmax)
                .is_some()
        })
        .collect();
    let mut graph = Graph::new(n);
    for (i, j) in edges {
        graph.add_edge(i, j);
    }
    OrthogonalityGraph {
        vertices,
        graph,
        kmax,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueResult {
    pub size: usize,
    pub witness: FrequencySet,
    pub pool_size: usize,
    pub edges: usize,
    pub edge_kmax: u64,
    pub verification: BizeroReport,
}

/// Largest mutually orthogonal family containing 0 within the pool.
pub fn max_orthogonal_clique(
    inst: &MeasureInstance,
    a: (i64, i64),
    pool: &CandidatePool,
) -> CliqueResult {
    let kmax = pool.edge_kmax();
    let lattice = ZeroLattice::new(inst, a);
    let og = orthogonality_graph(&lattice, &pool.frequencies, kmax);
    // Restrict to the neighbourhood of 0 so the clique always contains it.
    let nbrs: Vec<usize> = (1..og.vertices.len())
        .filter(|&v| og.graph.has_edge(0, v))
        .collect();
    let mut sub = Graph::new(nbrs.len());
    for (x, &u) in nbrs.iter().enumerate() {
        for (y, &v) in nbrs.iter().enumerate().skip(x + 1) {
            if og.graph.has_edge(u, v) {
                sub.add_edge(x, y);
            }
        }
    }
    let clique = max_clique(&sub);
    let mut points = vec![Vec2::zero()];
    points.extend(clique.iter().map(|&x| og.vertices[nbrs[x]].clone()));
    let verification = verify_with(&lattice, &points, kmax);
    let edges = (0..og.vertices.len())
        .map(|v| og.graph.degree(v))
        .sum::<usize>()
        / 2;
    let witness = FrequencySet::new(
        points,
        format!(
            "max_orthogonal_clique(kmax={}, radius={})",
            pool.kmax, pool.radius
        ),
        kmax.saturating_sub(2),
    );
    CliqueResult {
        size: witness.len(),
        witness,
        pool_size: pool.frequencies.len(),
        edges,
        edge_kmax: kmax,
        verification,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::p_element_family;
    use crate::model::{DigitSet, ExpandingMatrix};
    use crate::scalar::parse::parse_scalar_expr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inst(m: [&str; 3], d: Vec<(i64, i64)>) -> MeasureInstance {
        let s = |x: &str| parse_scalar_expr(x).unwrap();
        MeasureInstance::new(
            ExpandingMatrix::new(s(m[0]), s(m[1]), s(m[2])).unwrap(),
            DigitSet::new(d).unwrap(),
        )
    }

    fn ex61() -> MeasureInstance {
        inst(["6", "3/4", "6"], vec![(0, 0), (1, 0), (0, 1)])
    }

    fn exhaustive(g: &Graph) -> usize {
        let n = g.len();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            let vs: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
            if vs
                .iter()
                .enumerate()
                .all(|(i, &u)| vs[i + 1..].iter().all(|&v| g.has_edge(u, v)))
            {
                best = size;
            }
        }
        best
    }

    #[test]
    fn pool_counts() {
        let i = ex61();
        let pool = enumerate_candidates(&i, (1, 2), 1, 0);
        assert_eq!(pool.frequencies.len(), 2);
        let f = p_element_family(&i, (1, 2), 1);
        assert_eq!(pool.frequencies, f.points[1..].to_vec());
        assert!(enumerate_candidates(&i, (1, 2), 2, 1).frequencies.len() <= 36);
    }

    #[test]
    fn clique_matches_exhaustive_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.gen_range(0..=16);
            let density = rng.gen_range(0.1..0.9);
            let mut g = Graph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(density) {
                        g.add_edge(u, v);
                    }
                }
            }
            let c = max_clique(&g);
            assert_eq!(c.len(), exhaustive(&g));
            assert!(c
                .iter()
                .enumerate()
                .all(|(i, &u)| c[i + 1..].iter().all(|&v| g.has_edge(u, v))));
        }
    }

    #[test]
    fn clique_on_example_61() {
        let i = ex61();
        let pool = enumerate_candidates(&i, (1, 2), 2, 1);
        let r = max_orthogonal_clique(&i, (1, 2), &pool);
        assert!(r.verification.pass);
        assert!(r.size >= 3);
        let empty = CandidatePool {
            frequencies: vec![],
            kmax: 1,
            radius: 0,
            seed_depth: None,
        };
        let r = max_orthogonal_clique(&i, (1, 2), &empty);
        assert_eq!(r.size, 1);
        assert_eq!(r.witness.points, vec![Vec2::zero()]);
    }

    #[test]
    fn clique_on_m4() {
        let i = inst(
            ["(7)^(1/2)", "(7)^(1/2)", "(7)^(1/2)"],
            vec![(0, 0), (1, 0), (1, -1), (2, -1), (2, -2)],
        );
        let pool = enumerate_candidates(&i, (1, 4), 2, 1);
        assert!(pool.frequencies.len() <= 72);
        let r = max_orthogonal_clique(&i, (1, 4), &pool);
        assert_eq!(r.size, 5);
        assert!(r.verification.pass);
    }
}
