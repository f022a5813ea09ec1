//! Random generation: uniform Cayley trees and minimal factorizations, and the
//! lazily grown Kesten tree on which `Find` and `OFind` produce the limiting
//! labelling and trajectories.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bijections::{moszkowski_inverse_fast, prufer_parents, CayleyTree};
use crate::error::{Error, Result};
use crate::factorization::{Factorization, StepTrajectory};
use crate::labelling::{Explore, Labelling, WalkFailure, WalkTrace};
use crate::tree::{Edge, EvTree, PointedTree};

pub const DEFAULT_SEED: u64 = 1729;
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// A reproducible random stream: ChaCha8 keyed by `seed`, on stream `stream`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RandomSource {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        RandomSource { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

fn prufer_sequence<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n - 2).map(|_| rng.random_range(1..=n)).collect()
}

/// A uniform labelled tree on `{1..n}` from a uniform Prüfer sequence.
pub fn sample_cayley<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CayleyTree> {
    check_n(n)?;
    CayleyTree::from_prufer(n, &prufer_sequence(n, rng))
}

/// A uniform pointed tree with edge labels `1..n-1`, i.e. `φ⁻¹` of a uniform
/// Cayley tree, built in linear time.
pub fn sample_pointed_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PointedTree<u32>> {
    check_n(n)?;
    Ok(pointed_tree_from_prufer(n, &prufer_sequence(n, rng)))
}

/// `φ⁻¹` of the Cayley tree coded by `seq` after the relabelling
/// `v -> n+1-v`. A bijection from Prüfer sequences to pointed trees with edge
/// labels `1..n-1`.
pub(crate) fn pointed_tree_from_prufer(n: usize, seq: &[usize]) -> PointedTree<u32> {
    let parent = prufer_parents(n, seq);
    // relabel v -> n+1-v so the root n becomes 1; Cayley label c becomes id c-1
    let id = |v: usize| n - v;
    let mut degree = vec![0usize; n];
    let mut pid = vec![0usize; n];
    for v in 1..n {
        let (w, p) = (id(v), id(parent[v]));
        pid[w] = p;
        degree[w] += 1;
        degree[p] += 1;
    }
    let mut adj_start = vec![0usize; n + 1];
    for v in 0..n {
        adj_start[v + 1] = adj_start[v] + degree[v];
    }
    let mut fill = adj_start.clone();
    let mut adj = vec![(0u32, 0usize); 2 * (n - 1)];
    let mut edges = Vec::with_capacity(n - 1);
    // edge of id w carries label w, so filling in increasing w keeps lists sorted
    for (w, &p) in pid.iter().enumerate().skip(1) {
        let l = w as u32;
        adj[fill[w]] = (l, p);
        fill[w] += 1;
        adj[fill[p]] = (l, w);
        fill[p] += 1;
        edges.push(Edge { u: p, v: w, label: l });
    }
    PointedTree::from_sorted_parts(0, edges, adj_start, adj)
}

/// A uniform minimal factorization of `(1..n)`.
pub fn sample_uniform_factorization<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Factorization> {
    Ok(moszkowski_inverse_fast(&sample_pointed_tree(n, rng)?))
}

/// Poisson(1) by inversion against a cumulative table cut at 20.
#[derive(Clone, Debug)]
pub struct Poisson1 {
    cdf: [f64; 21],
}

impl Default for Poisson1 {
    fn default() -> Self {
        let mut cdf = [0.0; 21];
        let mut p = (-1.0f64).exp();
        let mut acc = 0.0;
        for (k, c) in cdf.iter_mut().enumerate() {
            if k > 0 {
                p /= k as f64;
            }
            acc += p;
            *c = acc;
        }
        Poisson1 { cdf }
    }
}

impl Poisson1 {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.iter().position(|&c| u < c).unwrap_or(20)
    }
}

#[derive(Clone, Debug)]
struct Node {
    parent: Option<usize>,
    special: bool,
    /// Incident `(label, neighbour)` pairs sorted by label, once expanded.
    adj: Option<Vec<(f64, usize)>>,
    parent_label: f64,
}

/// The size-biased Poisson(1) Galton-Watson tree conditioned to survive,
/// grown on demand. Node 0 is the root; edge labels are i.i.d. uniform.
#[derive(Clone, Debug)]
pub struct LazyKestenTree {
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
    poisson: Poisson1,
    seen_labels: HashSet<u64>,
}

impl LazyKestenTree {
    pub fn new(source: RandomSource) -> Self {
        LazyKestenTree {
            nodes: vec![Node {
                parent: None,
                special: true,
                adj: None,
                parent_label: f64::NAN,
            }],
            rng: source.rng(),
            poisson: Poisson1::default(),
            seen_labels: HashSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_special(&self, v: usize) -> bool {
        self.nodes[v].special
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.nodes[v].parent
    }

    pub fn is_expanded(&self, v: usize) -> bool {
        self.nodes[v].adj.is_some()
    }

    /// Materializes the children of `v`; repeated calls return the same ones.
    pub fn expand(&mut self, v: usize) -> Vec<usize> {
        self.incident(v);
        self.children(v).unwrap()
    }

    /// Children of an expanded node, `None` if not yet expanded.
    pub fn children(&self, v: usize) -> Option<Vec<usize>> {
        let parent = self.nodes[v].parent;
        self.nodes[v].adj.as_ref().map(|a| {
            let mut c: Vec<usize> = a.iter().map(|p| p.1).filter(|&w| Some(w) != parent).collect();
            c.sort_unstable();
            c
        })
    }

    /// Label of the edge from `v` to its parent.
    pub fn parent_label(&self, v: usize) -> Option<f64> {
        self.nodes[v].parent.map(|_| self.nodes[v].parent_label)
    }

    /// The special child of an expanded spine node.
    pub fn spine_child(&self, v: usize) -> Option<usize> {
        self.children(v)?.into_iter().find(|&c| self.nodes[c].special)
    }

    /// Number of incident edges once expanded.
    pub fn degree(&self, v: usize) -> Option<usize> {
        self.nodes[v].adj.as_ref().map(|a| a.len())
    }

    /// Offspring count once expanded.
    pub fn offspring(&self, v: usize) -> Option<usize> {
        self.children(v).map(|c| c.len())
    }

    fn incident(&mut self, v: usize) -> &[(f64, usize)] {
        if self.nodes[v].adj.is_none() {
            let special = self.nodes[v].special;
            let k = self.poisson.sample(&mut self.rng) + usize::from(special);
            let heir = if special {
                Some(self.rng.random_range(0..k))
            } else {
                None
            };
            let mut adj = Vec::with_capacity(k + 1);
            if let Some(p) = self.nodes[v].parent {
                adj.push((self.nodes[v].parent_label, p));
            }
            for j in 0..k {
                let label: f64 = self.rng.random();
                assert!(self.seen_labels.insert(label.to_bits()), "edge label collision");
                let id = self.nodes.len();
                self.nodes.push(Node {
                    parent: Some(v),
                    special: heir == Some(j),
                    adj: None,
                    parent_label: label,
                });
                adj.push((label, id));
            }
            adj.sort_by(|a, b| a.0.total_cmp(&b.0));
            self.nodes[v].adj = Some(adj);
        }
        self.nodes[v].adj.as_deref().unwrap()
    }

    /// The explored part: every materialized node with its parent edge.
    pub fn fragment(&self) -> PointedTree<f64> {
        let edges = self
            .nodes
            .iter()
            .enumerate()
            .skip(1)
            .map(|(v, node)| Edge {
                u: node.parent.unwrap(),
                v,
                label: node.parent_label,
            })
            .collect();
        PointedTree::new(self.nodes.len(), 0, edges).expect("explored nodes form a tree")
    }
}

impl Explore for LazyKestenTree {
    type Label = f64;

    fn point(&self) -> usize {
        0
    }

    fn size(&self) -> Option<usize> {
        None
    }

    fn ascend(&mut self, v: usize, above: Option<f64>) -> Option<(f64, usize)> {
        let adj = self.incident(v);
        let idx = above.map_or(0, |x| adj.partition_point(|p| p.0 <= x));
        adj.get(idx).copied()
    }

    fn descend(&mut self, v: usize, below: Option<f64>) -> Option<(f64, usize)> {
        let adj = self.incident(v);
        let idx = below.map_or(adj.len(), |x| adj.partition_point(|p| p.0 < x));
        idx.checked_sub(1).map(|i| adj[i])
    }
}

/// `Find_∞ ∘ OFind_∞` on a lazy Kesten tree, extended on request.
#[derive(Clone, Debug)]
pub struct LimitRun {
    tree: LazyKestenTree,
    labelling: Labelling<f64>,
    k: usize,
    budget: u64,
}

impl LimitRun {
    pub fn new(source: RandomSource, budget: u64) -> Self {
        LimitRun {
            tree: LazyKestenTree::new(source),
            labelling: Labelling::new(0),
            k: 0,
            budget,
        }
    }

    /// A run already labelled out to `-k..=k+1`.
    pub fn with_radius(source: RandomSource, k: usize, budget: u64) -> Result<Self> {
        let mut run = LimitRun::new(source, budget);
        run.extend(k)?;
        Ok(run)
    }

    pub fn radius(&self) -> usize {
        self.k
    }

    pub fn tree(&self) -> &LazyKestenTree {
        &self.tree
    }

    pub fn labelling(&self) -> &Labelling<f64> {
        &self.labelling
    }

    /// Ensures labels `-k..=k+1` are assigned.
    pub fn extend(&mut self, k: usize) -> Result<()> {
        self.extend_find(k + 1)?;
        self.extend_ofind(k)?;
        self.k = self.k.max(k);
        Ok(())
    }

    /// Assigns positive labels up to `k` only.
    pub fn extend_find(&mut self, k: usize) -> Result<()> {
        let r = self.labelling.find_to(&mut self.tree, k, Some(self.budget));
        self.lift(r)
    }

    /// Assigns non-positive labels down to `-k` only.
    pub fn extend_ofind(&mut self, k: usize) -> Result<()> {
        let r = self.labelling.ofind_to(&mut self.tree, k, Some(self.budget));
        self.lift(r)
    }

    fn lift(&self, r: std::result::Result<(), WalkFailure>) -> Result<()> {
        match r {
            Ok(()) => Ok(()),
            Err(WalkFailure::Invalid(e)) => Err(e),
            Err(WalkFailure::Budget { label, steps }) => Err(Error::StepBudget {
                label,
                steps,
                partial: Box::new(self.fragment()),
            }),
        }
    }

    pub fn label_of(&self, v: usize) -> Option<i64> {
        self.labelling.label_of(v)
    }

    pub fn vertex_of(&self, label: i64) -> Option<usize> {
        self.labelling.vertex_of(label)
    }

    /// The explored fragment with its current vertex labels.
    pub fn fragment(&self) -> EvTree<f64> {
        let tree = self.tree.fragment();
        let mut vl = self.labelling.vlabels().to_vec();
        vl.resize(tree.len(), None);
        EvTree::new(tree, vl).expect("labels are injective")
    }

    /// The walk from `i` to `i+1` in increasing label order.
    pub fn walk(&self, i: i64) -> Result<WalkTrace<f64>> {
        let trace = self.labelling.trace(i).ok_or(Error::Unresolved { index: i })?;
        let mut t = trace.clone();
        if i <= 0 {
            t.vertices.reverse();
            t.edge_labels.reverse();
        }
        Ok(t)
    }

    /// `X_i` on `[0, 1]`: breakpoints `0 < ℓ₁ < ..` with the sentinel 2 as end.
    pub fn limit_trajectory(&self, i: i64) -> Result<StepTrajectory<f64>> {
        let w = self.walk(i)?;
        let mut values = Vec::with_capacity(w.vertices.len());
        for &v in &w.vertices {
            match self.labelling.label_of(v) {
                Some(l) => values.push(l),
                None => return Err(Error::Unresolved { index: i }),
            }
        }
        let mut breaks = vec![0.0];
        breaks.extend(&w.edge_labels);
        Ok(StepTrajectory {
            breaks,
            values,
            end: 2.0,
        })
    }

    /// `X_i`, doubling the radius until every visited vertex is labelled.
    pub fn resolve_trajectory(&mut self, i: i64, max_k: usize) -> Result<StepTrajectory<f64>> {
        let mut k = self.k.max(i.unsigned_abs() as usize).max(1);
        loop {
            self.extend(k)?;
            match self.limit_trajectory(i) {
                Err(Error::Unresolved { .. }) if k < max_k => k = (2 * k).min(max_k),
                r => return r,
            }
        }
    }

    /// The walk `X_i` follows from vertex `v`: increasing edge labels, each
    /// step to the smallest label above the last, until none is left.
    pub fn greedy_walk(&mut self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut last = None;
        let mut cur = v;
        while let Some((label, next)) = self.tree.ascend(cur, last) {
            path.push(next);
            last = Some(label);
            cur = next;
        }
        path
    }

    /// Vertices with an increasing path to one of `targets`, found by
    /// following decreasing labels outwards from them.
    fn increasing_basin(&mut self, targets: &[usize]) -> Vec<usize> {
        let mut seen: HashSet<usize> = targets.iter().copied().collect();
        let mut stack: Vec<(usize, f64)> = targets.iter().map(|&w| (w, f64::INFINITY)).collect();
        while let Some((x, below)) = stack.pop() {
            let adj = self.tree.incident(x).to_vec();
            for (label, y) in adj {
                if label < below {
                    seen.insert(y);
                    stack.push((y, label));
                }
            }
        }
        let mut out: Vec<usize> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// `𝓘_A = {i : min_t |X_i(t)| <= A}`. Only vertices with an increasing
    /// path into the labels `[-A, A]` can start such a walk; each candidate's
    /// walk is traced and, if it enters, its start label is resolved by
    /// widening the radius up to `max_k`.
    pub fn limit_entering_indices(&mut self, a: i64, max_k: usize) -> Result<BTreeSet<i64>> {
        if a < 0 {
            return Err(Error::Domain("A must be non-negative".into()));
        }
        self.extend((a as usize).max(1))?;
        let band: Vec<usize> = (-a..=a).map(|l| self.vertex_of(l).expect("labelled")).collect();
        let in_band: HashSet<usize> = band.iter().copied().collect();
        let mut out = BTreeSet::new();
        for u in self.increasing_basin(&band) {
            if !self.greedy_walk(u).iter().any(|v| in_band.contains(v)) {
                continue;
            }
            let mut k = self.k.max(1);
            while self.label_of(u).is_none() {
                if 2 * k > max_k {
                    return Err(Error::EnumerationCap { n: 2 * k, cap: max_k });
                }
                k *= 2;
                self.extend(k)?;
            }
            out.insert(self.label_of(u).unwrap());
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Traj {
            i: i64,
            breaks: Vec<f64>,
            values: Vec<i64>,
        }
        #[derive(Serialize)]
        struct Record {
            #[serde(rename = "K")]
            k: usize,
            vlabels: BTreeMap<String, i64>,
            trajectories: Vec<Traj>,
        }
        let k = self.k as i64;
        let trajectories = (-k..=k)
            .filter_map(|i| {
                self.limit_trajectory(i).ok().map(|t| Traj {
                    i,
                    breaks: t.breaks,
                    values: t.values,
                })
            })
            .collect();
        let vlabels = self
            .labelling
            .vlabels()
            .iter()
            .enumerate()
            .filter_map(|(v, l)| l.map(|l| (v.to_string(), l)))
            .collect();
        serde_json::to_string(&Record {
            k: self.k,
            vlabels,
            trajectories,
        })
        .expect("limit run serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bijections::{moszkowski_forward, phi_inverse};

    #[test]
    fn same_source_same_draws() {
        let a: Vec<u64> = (0..5).map(|_| RandomSource::new(3).with_stream(2).rng().random()).collect();
        let b: Vec<u64> = (0..5).map(|_| RandomSource::new(3).with_stream(2).rng().random()).collect();
        assert_eq!(a, b);
        let c: u64 = RandomSource::new(3).with_stream(1).rng().random();
        assert_ne!(a[0], c);
    }

    #[test]
    fn fast_tree_matches_bijection_chain() {
        let mut rng = RandomSource::new(5).rng();
        for n in [2, 3, 7, 30] {
            for _ in 0..20 {
                let seq = prufer_sequence(n, &mut rng.clone());
                let t = sample_pointed_tree(n, &mut rng).unwrap();
                let parent = prufer_parents(n, &seq);
                let edges: Vec<(usize, usize)> = (1..n).map(|v| (n + 1 - v, n + 1 - parent[v])).collect();
                let c = CayleyTree::new(n, &edges).unwrap();
                let slow = phi_inverse(&c);
                let key = |t: &PointedTree<u32>| {
                    let mut e: Vec<_> = t.edges().iter().map(|e| (e.label, e.u.min(e.v), e.u.max(e.v))).collect();
                    e.sort();
                    e
                };
                assert_eq!(key(&t), key(&slow));
                let f = sample_uniform_factorization(n, &mut rng).unwrap();
                assert!(f.is_minimal());
                assert_eq!(moszkowski_forward(&f).unwrap().len(), n);
            }
        }
        assert!(sample_cayley(1, &mut rng).is_err());
        assert_eq!(sample_cayley(2, &mut rng).unwrap().edges(), &[(1, 2)]);
    }

    #[test]
    fn expansion_is_idempotent() {
        let mut t = LazyKestenTree::new(RandomSource::new(9));
        let c1 = t.expand(0);
        let c2 = t.expand(0);
        assert_eq!(c1, c2);
        assert!(!c1.is_empty());
        assert_eq!(c1.iter().filter(|&&c| t.is_special(c)).count(), 1);
    }

    #[test]
    fn small_run() {
        let run = LimitRun::with_radius(RandomSource::new(11), 1, DEFAULT_STEP_BUDGET).unwrap();
        for l in -1..=2 {
            assert!(run.vertex_of(l).is_some());
        }
        assert_eq!(run.label_of(0), Some(1));
        for i in -1..=1 {
            if let Ok(x) = run.limit_trajectory(i) {
                assert_eq!(x.value_at(0.0), i);
                assert_eq!(x.value_at(1.0), i + 1);
            }
        }
        let json = run.to_json();
        assert!(json.starts_with(r#"{"K":1,"vlabels":{"0":1"#));
    }

    #[test]
    fn deterministic_fragment() {
        let a = LimitRun::with_radius(RandomSource::new(4).with_stream(8), 5, DEFAULT_STEP_BUDGET).unwrap();
        let b = LimitRun::with_radius(RandomSource::new(4).with_stream(8), 5, DEFAULT_STEP_BUDGET).unwrap();
        assert_eq!(a.fragment(), b.fragment());
    }

    #[test]
    fn entering_indices_contain_window() {
        for s in 0..20 {
            let mut run = LimitRun::new(RandomSource::new(2).with_stream(s), DEFAULT_STEP_BUDGET);
            let set = match run.limit_entering_indices(2, 1 << 16) {
                Err(e) if e.is_resource() => continue,
                r => r.unwrap(),
            };
            for i in -2..=2 {
                assert!(set.contains(&i));
            }
        }
    }

    #[test]
    fn tiny_budget_reports_partial() {
        let mut hit = false;
        for s in 0..50 {
            let mut run = LimitRun::new(RandomSource::new(1).with_stream(s), 1);
            if let Err(e) = run.extend(20) {
                assert!(e.is_resource());
                if let Error::StepBudget { partial, .. } = e {
                    assert!(partial.tree.len() >= 1);
                }
                hit = true;
                break;
            }
        }
        assert!(hit);
    }

    #[test]
    fn greedy_walks_match_labelling() {
        for s in 0..30 {
            let mut run = LimitRun::with_radius(RandomSource::new(6).with_stream(s), 8, DEFAULT_STEP_BUDGET).unwrap();
            for i in -8..=8 {
                let v = run.vertex_of(i).unwrap();
                assert_eq!(run.greedy_walk(v), run.walk(i).unwrap().vertices, "stream {s}, i = {i}");
            }
        }
    }

    #[test]
    fn entering_indices_match_wide_scan() {
        for s in 0..40 {
            let mut run = LimitRun::new(RandomSource::new(13).with_stream(s), DEFAULT_STEP_BUDGET);
            let set = match run.limit_entering_indices(1, 1 << 16) {
                Err(e) if e.is_resource() => continue,
                r => r.unwrap(),
            };
            let far = set.iter().map(|i| i.unsigned_abs() as usize + 1).max().unwrap().max(256);
            run.extend(far).unwrap();
            let k = far as i64;
            let scan: BTreeSet<i64> = (-k..=k)
                .filter(|&i| {
                    run.walk(i)
                        .unwrap()
                        .vertices
                        .iter()
                        .any(|&v| run.label_of(v).is_some_and(|l| l.abs() <= 1))
                })
                .collect();
            assert_eq!(set, scan, "stream {s}");
        }
    }
}
