//! Labelled trees: plane trees in Neveu addressing, pointed non-plane trees
//! with distinct edge labels, partial integer vertex labellings, and labelled
//! balls around the pointed vertex.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};
use std::fmt::{Display, Write as _};
use std::ops::Mul;

use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge<L> {
    pub u: usize,
    pub v: usize,
    pub label: L,
}

fn cmp_labels<L: PartialOrd>(a: &L, b: &L) -> Ordering {
    a.partial_cmp(b).expect("edge labels are totally ordered")
}

/// A pointed non-plane tree on vertices `0..n` with pairwise distinct edge
/// labels. Adjacency lists are kept sorted by edge label.
#[derive(Clone, Debug, PartialEq)]
pub struct PointedTree<L> {
    point: usize,
    edges: Vec<Edge<L>>,
    adj_start: Vec<usize>,
    adj: Vec<(L, usize)>,
}

impl<L: Copy + PartialOrd> PointedTree<L> {
    pub fn new(n: usize, point: usize, edges: Vec<Edge<L>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Malformed("a tree needs at least one vertex".into()));
        }
        if point >= n {
            return Err(Error::Malformed(format!("pointed vertex {point} >= {n}")));
        }
        if edges.len() != n - 1 {
            return Err(Error::Malformed(format!(
                "a tree on {n} vertices has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        if edges.iter().any(|e| e.label.partial_cmp(&e.label).is_none()) {
            return Err(Error::Malformed("edge labels must be comparable".into()));
        }
        let mut sorted: Vec<L> = edges.iter().map(|e| e.label).collect();
        sorted.sort_by(cmp_labels);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Malformed("edge labels must be pairwise distinct".into()));
        }

        let mut degree = vec![0usize; n];
        for e in &edges {
            if e.u >= n || e.v >= n || e.u == e.v {
                return Err(Error::Malformed(format!("bad edge {}-{}", e.u, e.v)));
            }
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut adj_start = vec![0usize; n + 1];
        for v in 0..n {
            adj_start[v + 1] = adj_start[v] + degree[v];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![(edges.first().map(|e| e.label), 0usize); 2 * edges.len()];
        for e in &edges {
            adj[fill[e.u]] = (Some(e.label), e.v);
            fill[e.u] += 1;
            adj[fill[e.v]] = (Some(e.label), e.u);
            fill[e.v] += 1;
        }
        let mut adj: Vec<(L, usize)> = adj.into_iter().map(|(l, v)| (l.unwrap(), v)).collect();
        for v in 0..n {
            adj[adj_start[v]..adj_start[v + 1]].sort_by(|a, b| cmp_labels(&a.0, &b.0));
        }
        let tree = PointedTree {
            point,
            edges,
            adj_start,
            adj,
        };
        // n - 1 edges and connected implies acyclic
        if tree.distances_from(point).iter().any(|d| d.is_none()) {
            return Err(Error::Malformed("edges do not form a connected tree".into()));
        }
        Ok(tree)
    }

    /// Builds a tree from parts already known to be valid, with every
    /// adjacency slice sorted by label. Skips all checks.
    pub(crate) fn from_sorted_parts(
        point: usize,
        edges: Vec<Edge<L>>,
        adj_start: Vec<usize>,
        adj: Vec<(L, usize)>,
    ) -> Self {
        debug_assert_eq!(adj.len(), 2 * edges.len());
        PointedTree {
            point,
            edges,
            adj_start,
            adj,
        }
    }

    pub fn len(&self) -> usize {
        self.adj_start.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn edges(&self) -> &[Edge<L>] {
        &self.edges
    }

    /// Incident `(label, neighbour)` pairs sorted by increasing label.
    #[inline]
    pub fn neighbours(&self, v: usize) -> &[(L, usize)] {
        &self.adj[self.adj_start[v]..self.adj_start[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj_start[v + 1] - self.adj_start[v]
    }

    /// Smallest incident label strictly above `above` (any label if `None`).
    #[inline]
    pub fn next_above(&self, v: usize, above: Option<L>) -> Option<(L, usize)> {
        let nb = self.neighbours(v);
        let idx = match above {
            None => 0,
            Some(x) => nb.partition_point(|(l, _)| *l <= x),
        };
        nb.get(idx).copied()
    }

    /// Largest incident label strictly below `below` (any label if `None`).
    #[inline]
    pub fn next_below(&self, v: usize, below: Option<L>) -> Option<(L, usize)> {
        let nb = self.neighbours(v);
        let idx = match below {
            None => nb.len(),
            Some(x) => nb.partition_point(|(l, _)| *l < x),
        };
        idx.checked_sub(1).map(|i| nb[i])
    }

    pub fn distances_from(&self, root: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &(_, w) in self.neighbours(u) {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: usize, v: usize) -> usize {
        self.distances_from(u)[v].expect("tree is connected")
    }

    pub fn height(&self) -> usize {
        self.distances_from(self.point)
            .into_iter()
            .flatten()
            .max()
            .unwrap_or(0)
    }

    pub fn with_point(&self, point: usize) -> Result<Self> {
        PointedTree::new(self.len(), point, self.edges.clone())
    }

    pub fn map_labels<M: Copy + PartialOrd>(&self, f: impl Fn(L) -> M) -> Result<PointedTree<M>> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                u: e.u,
                v: e.v,
                label: f(e.label),
            })
            .collect();
        PointedTree::new(self.len(), self.point, edges)
    }

    /// Multiplies every edge label by `alpha > 0`.
    pub fn scale_edge_labels(&self, alpha: L) -> Result<Self>
    where
        L: Mul<Output = L> + Zero,
    {
        if !(alpha > L::zero()) {
            return Err(Error::Domain("scaling factor must be positive".into()));
        }
        self.map_labels(|l| l * alpha)
    }

    /// Edge label ranks (0-based) in increasing label order.
    pub fn label_ranks(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by(|&a, &b| cmp_labels(&self.edges[a].label, &self.edges[b].label));
        let mut rank = vec![0; order.len()];
        for (r, e) in order.into_iter().enumerate() {
            rank[e] = r;
        }
        rank
    }
}

/// A pointed tree with a partial injective integer vertex labelling.
#[derive(Clone, Debug, PartialEq)]
pub struct EvTree<L> {
    pub tree: PointedTree<L>,
    vlabels: Vec<Option<i64>>,
}

impl<L: Copy + PartialOrd> EvTree<L> {
    pub fn new(tree: PointedTree<L>, vlabels: Vec<Option<i64>>) -> Result<Self> {
        if vlabels.len() != tree.len() {
            return Err(Error::Malformed(format!(
                "{} vertex labels for {} vertices",
                vlabels.len(),
                tree.len()
            )));
        }
        let mut seen: Vec<i64> = vlabels.iter().flatten().copied().collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Malformed("vertex labels must be distinct".into()));
        }
        Ok(EvTree { tree, vlabels })
    }

    pub fn unlabelled(tree: PointedTree<L>) -> Self {
        let n = tree.len();
        EvTree {
            tree,
            vlabels: vec![None; n],
        }
    }

    pub fn vlabels(&self) -> &[Option<i64>] {
        &self.vlabels
    }

    pub fn label_of(&self, v: usize) -> Option<i64> {
        self.vlabels[v]
    }

    pub fn vertex_with_label(&self, label: i64) -> Option<usize> {
        self.vlabels.iter().position(|&l| l == Some(label))
    }

    pub fn forget_vertex_labels(&self) -> PointedTree<L> {
        self.tree.clone()
    }

    pub fn scale_edge_labels(&self, alpha: L) -> Result<Self>
    where
        L: Mul<Output = L> + Zero,
    {
        Ok(EvTree {
            tree: self.tree.scale_edge_labels(alpha)?,
            vlabels: self.vlabels.clone(),
        })
    }

    pub fn to_json(&self) -> String
    where
        L: Serialize,
    {
        let record = TreeRecord {
            point: self.tree.point,
            edges: self.tree.edges.clone(),
            vlabels: self
                .vlabels
                .iter()
                .enumerate()
                .filter_map(|(v, l)| l.map(|l| (v.to_string(), l)))
                .collect(),
        };
        serde_json::to_string(&record).expect("tree serializes")
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        L: DeserializeOwned,
    {
        let record: TreeRecord<L> = serde_json::from_str(s)?;
        let n = record.edges.len() + 1;
        let tree = PointedTree::new(n, record.point, record.edges)?;
        let mut vlabels = vec![None; n];
        for (id, l) in record.vlabels {
            let v: usize = id
                .parse()
                .map_err(|_| Error::Malformed(format!("vertex id {id:?} is not an integer")))?;
            if v >= n {
                return Err(Error::Malformed(format!("vertex id {v} out of range")));
            }
            vlabels[v] = Some(l);
        }
        EvTree::new(tree, vlabels)
    }

    /// Graphviz rendering; the pointed vertex is drawn doubled.
    pub fn to_dot(&self, name: &str) -> String
    where
        L: Display,
    {
        let mut out = format!("graph {name} {{\n");
        for v in 0..self.tree.len() {
            let shape = if v == self.tree.point {
                "doublecircle"
            } else {
                "circle"
            };
            let text = self.vlabels[v].map(|l| l.to_string()).unwrap_or_default();
            let _ = writeln!(out, "  v{v} [shape={shape}, label=\"{text}\"];");
        }
        for e in &self.tree.edges {
            let _ = writeln!(out, "  v{} -- v{} [label=\"{}\"];", e.u, e.v, e.label);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TreeRecord<L> {
    point: usize,
    edges: Vec<Edge<L>>,
    vlabels: BTreeMap<String, i64>,
}

/// The labelled ball of radius `radius` around the pointed vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball<L> {
    pub radius: usize,
    pub tree: EvTree<L>,
    /// Ball vertex -> vertex of the tree it was cut from.
    pub origin: Vec<usize>,
}

pub fn ball<L: Copy + PartialOrd>(t: &EvTree<L>, h: usize) -> Ball<L> {
    let dist = t.tree.distances_from(t.tree.point);
    let mut index = vec![usize::MAX; t.tree.len()];
    let mut origin = Vec::new();
    for (v, d) in dist.iter().enumerate() {
        if d.is_some_and(|d| d <= h) {
            index[v] = origin.len();
            origin.push(v);
        }
    }
    let edges = t
        .tree
        .edges
        .iter()
        .filter(|e| index[e.u] != usize::MAX && index[e.v] != usize::MAX)
        .map(|e| Edge {
            u: index[e.u],
            v: index[e.v],
            label: e.label,
        })
        .collect();
    let tree = PointedTree::new(origin.len(), index[t.tree.point], edges)
        .expect("a ball around the point is a tree");
    let vlabels = origin.iter().map(|&v| t.vlabels[v]).collect();
    Ball {
        radius: h,
        tree: EvTree { tree, vlabels },
        origin,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeMatch {
    /// Edge labels must coincide.
    Exact,
    /// Edge labels must induce the same relative order.
    Compatible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Token {
    Open(Option<i64>),
    Edge(usize),
    Close,
}

/// Canonical encoding of a pointed tree up to isomorphism, with vertex labels
/// folded in and edge labels replaced by their rank.
fn canonical_code<L: Copy + PartialOrd>(t: &EvTree<L>) -> Vec<Token> {
    let tree = &t.tree;
    let rank_of = tree.label_ranks();
    let mut edge_rank = vec![Vec::new(); tree.len()];
    for (e, edge) in tree.edges.iter().enumerate() {
        edge_rank[edge.u].push((edge.v, rank_of[e]));
        edge_rank[edge.v].push((edge.u, rank_of[e]));
    }
    // iterative post-order from the point
    let mut parent = vec![usize::MAX; tree.len()];
    let mut order = Vec::with_capacity(tree.len());
    let mut stack = vec![tree.point];
    parent[tree.point] = tree.point;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &(w, _) in &edge_rank[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                stack.push(w);
            }
        }
    }
    let mut code: Vec<Vec<Token>> = vec![Vec::new(); tree.len()];
    for &u in order.iter().rev() {
        let mut kids: Vec<Vec<Token>> = edge_rank[u]
            .iter()
            .filter(|&&(w, _)| parent[w] == u && w != u)
            .map(|&(w, r)| {
                let mut c = vec![Token::Edge(r)];
                c.append(&mut code[w]);
                c
            })
            .collect();
        kids.sort();
        let mut c = vec![Token::Open(t.vlabels[u])];
        for k in kids {
            c.extend(k);
        }
        c.push(Token::Close);
        code[u] = c;
    }
    std::mem::take(&mut code[tree.point])
}

/// Whether two balls are isomorphic as pointed trees with identical vertex
/// labels, and with identical (`Exact`) or order-isomorphic (`Compatible`)
/// edge labels.
pub fn balls_agree<L: Copy + PartialOrd>(b1: &Ball<L>, b2: &Ball<L>, mode: EdgeMatch) -> bool {
    if b1.radius != b2.radius {
        return false;
    }
    match mode {
        EdgeMatch::Compatible => balls_compatible(b1, b2),
        EdgeMatch::Exact => {
            let sorted = |b: &Ball<L>| {
                let mut v: Vec<L> = b.tree.tree.edges.iter().map(|e| e.label).collect();
                v.sort_by(cmp_labels);
                v
            };
            // equal rank codes + equal sorted label lists give a label-preserving isomorphism
            sorted(b1) == sorted(b2) && canonical_code(&b1.tree) == canonical_code(&b2.tree)
        }
    }
}

/// Compatible-mode comparison across label types (e.g. integer vs float labels).
pub fn balls_compatible<L1, L2>(b1: &Ball<L1>, b2: &Ball<L2>) -> bool
where
    L1: Copy + PartialOrd,
    L2: Copy + PartialOrd,
{
    b1.radius == b2.radius && canonical_code(&b1.tree) == canonical_code(&b2.tree)
}

/// A rooted plane tree in Neveu addressing. Node 0 is the root `∅`; child `j`
/// (1-based) of `u` has address `u·j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl PlaneTree {
    /// Builds a plane tree from its addresses. Node ids follow the order of
    /// `words`; the set must contain `∅`, be prefix-closed, and the children of
    /// each node must be numbered `1..=k_u` exactly.
    pub fn from_words(words: &[Vec<u32>]) -> Result<Self> {
        let mut index: BTreeMap<&[u32], usize> = BTreeMap::new();
        for (id, w) in words.iter().enumerate() {
            if index.insert(w.as_slice(), id).is_some() {
                return Err(Error::Malformed(format!("duplicate address {w:?}")));
            }
        }
        let root = *index
            .get([].as_slice())
            .ok_or_else(|| Error::Malformed("plane tree must contain the empty word".into()))?;
        if root != 0 {
            return Err(Error::Malformed("the empty word must come first".into()));
        }
        let mut parent = vec![None; words.len()];
        let mut slots: Vec<BTreeMap<u32, usize>> = vec![BTreeMap::new(); words.len()];
        for (id, w) in words.iter().enumerate().skip(1) {
            let (&last, prefix) = w.split_last().unwrap();
            if last == 0 {
                return Err(Error::Malformed(format!("address {w:?} uses child index 0")));
            }
            let p = *index
                .get(prefix)
                .ok_or_else(|| Error::Malformed(format!("address {w:?} has no parent")))?;
            parent[id] = Some(p);
            slots[p].insert(last, id);
        }
        let mut children = Vec::with_capacity(words.len());
        for (u, s) in slots.into_iter().enumerate() {
            if s.keys().copied().ne(1..=s.len() as u32) {
                return Err(Error::Malformed(format!(
                    "children of {:?} are not numbered 1..k",
                    words[u]
                )));
            }
            children.push(s.into_values().collect());
        }
        Ok(PlaneTree { parent, children })
    }

    /// Builds a plane tree from ordered child lists, node 0 being the root.
    pub fn from_children(children: Vec<Vec<usize>>) -> Result<Self> {
        let mut parent = vec![None; children.len()];
        for (u, kids) in children.iter().enumerate() {
            for &c in kids {
                if c == 0 || c >= children.len() || parent[c].is_some() {
                    return Err(Error::Malformed(format!("bad child {c} of {u}")));
                }
                parent[c] = Some(u);
            }
        }
        if parent.iter().skip(1).any(|p| p.is_none()) {
            return Err(Error::Malformed("every non-root node needs a parent".into()));
        }
        let tree = PlaneTree { parent, children };
        // reject cycles not reachable from the root
        let mut seen = 1;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            seen += tree.children[u].len();
            stack.extend(&tree.children[u]);
            if seen > tree.len() {
                break;
            }
        }
        if seen != tree.len() {
            return Err(Error::Malformed("child lists do not form a tree".into()));
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        self.parent[u]
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    /// `k_u`, the number of children of `u`.
    pub fn child_count(&self, u: usize) -> usize {
        self.children[u].len()
    }

    /// Neveu address of `u`.
    pub fn word(&self, mut u: usize) -> Vec<u32> {
        let mut w = Vec::new();
        while let Some(p) = self.parent[u] {
            let j = self.children[p].iter().position(|&c| c == u).unwrap();
            w.push(j as u32 + 1);
            u = p;
        }
        w.reverse();
        w
    }

    pub fn generation(&self, u: usize) -> usize {
        self.word(u).len()
    }
}

/// A plane tree with a label on the edge above every non-root node and a
/// partial vertex labelling.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelledPlaneTree<L> {
    pub tree: PlaneTree,
    /// `edge_labels[u]` labels the edge between `u` and its parent; `None` at the root.
    pub edge_labels: Vec<Option<L>>,
    pub vlabels: Vec<Option<i64>>,
}

impl<L: Copy + PartialOrd> LabelledPlaneTree<L> {
    pub fn new(tree: PlaneTree, edge_labels: Vec<Option<L>>) -> Result<Self> {
        if edge_labels.len() != tree.len()
            || edge_labels[0].is_some()
            || edge_labels.iter().skip(1).any(|l| l.is_none())
        {
            return Err(Error::Malformed(
                "every non-root node needs exactly one parent-edge label".into(),
            ));
        }
        let n = tree.len();
        Ok(LabelledPlaneTree {
            tree,
            edge_labels,
            vlabels: vec![None; n],
        })
    }

    /// Incident `(label, neighbour)` pairs of `u` in planar order.
    pub fn incident(&self, u: usize) -> Vec<(L, usize)> {
        let mut out = Vec::with_capacity(self.tree.child_count(u) + 1);
        if let Some(p) = self.tree.parent(u) {
            out.push((self.edge_labels[u].unwrap(), p));
        }
        for &c in self.tree.children(u) {
            out.push((self.edge_labels[c].unwrap(), c));
        }
        out
    }
}

/// Forgets the planar order and points at the root; node ids and labels are kept.
pub fn shape<L: Copy + PartialOrd>(t: &LabelledPlaneTree<L>) -> Result<EvTree<L>> {
    let edges = (1..t.tree.len())
        .map(|u| Edge {
            u: t.tree.parent(u).unwrap(),
            v: u,
            label: t.edge_labels[u].unwrap(),
        })
        .collect();
    let tree = PointedTree::new(t.tree.len(), 0, edges)?;
    EvTree::new(tree, t.vlabels.clone())
}
