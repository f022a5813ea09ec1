//! The `Find` and `OFind` relabelling walks.
//!
//! Starting from the pointed vertex (label 1), `Find` reaches label `i+1` from
//! label `i` by repeatedly crossing the smallest incident edge label above the
//! last crossed one, stopping where no larger label is available. `OFind`
//! mirrors this with decreasing labels and assigns `0, -1, -2, ..`.
//!
//! The walker only needs neighbour queries, so it runs unchanged on finite
//! trees, plane trees and the lazily grown infinite tree.

use std::fmt::Display;
use std::io::Write;

use crate::error::{Error, Result};
use crate::tree::{EvTree, LabelledPlaneTree, PointedTree};

/// Neighbour queries needed by the walker. Vertex ids are `usize`; an
/// implementation may create new vertices while answering.
pub trait Explore {
    type Label: Copy + PartialOrd;

    fn point(&self) -> usize;

    /// Number of vertices for finite trees, `None` for unbounded ones.
    fn size(&self) -> Option<usize>;

    /// Smallest incident edge label strictly above `above`.
    fn ascend(&mut self, v: usize, above: Option<Self::Label>) -> Option<(Self::Label, usize)>;

    /// Largest incident edge label strictly below `below`.
    fn descend(&mut self, v: usize, below: Option<Self::Label>) -> Option<(Self::Label, usize)>;
}

impl<L: Copy + PartialOrd> Explore for &PointedTree<L> {
    type Label = L;

    fn point(&self) -> usize {
        PointedTree::point(self)
    }

    fn size(&self) -> Option<usize> {
        Some(self.len())
    }

    fn ascend(&mut self, v: usize, above: Option<L>) -> Option<(L, usize)> {
        self.next_above(v, above)
    }

    fn descend(&mut self, v: usize, below: Option<L>) -> Option<(L, usize)> {
        self.next_below(v, below)
    }
}

impl<L: Copy + PartialOrd> Explore for &LabelledPlaneTree<L> {
    type Label = L;

    fn point(&self) -> usize {
        0
    }

    fn size(&self) -> Option<usize> {
        Some(self.tree.len())
    }

    fn ascend(&mut self, v: usize, above: Option<L>) -> Option<(L, usize)> {
        self.incident(v)
            .into_iter()
            .filter(|(l, _)| above.is_none_or(|a| *l > a))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    }

    fn descend(&mut self, v: usize, below: Option<L>) -> Option<(L, usize)> {
        self.incident(v)
            .into_iter()
            .filter(|(l, _)| below.is_none_or(|b| *l < b))
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Find,
    OFind,
}

/// One walk. For `Find`, `vertices[0]` carries label `i` and the last vertex
/// receives `i+1`. For `OFind`, `vertices[0]` carries `i+1` and the last
/// vertex receives `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkTrace<L> {
    pub i: i64,
    pub direction: Direction,
    pub vertices: Vec<usize>,
    pub edge_labels: Vec<L>,
}

impl<L> WalkTrace<L> {
    /// `K_i`, the number of crossed edges.
    pub fn len(&self) -> usize {
        self.edge_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_labels.is_empty()
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().unwrap()
    }
}

/// Why an incremental labelling step stopped.
#[derive(Debug)]
pub enum WalkFailure {
    Budget { label: i64, steps: u64 },
    Invalid(Error),
}

impl From<Error> for WalkFailure {
    fn from(e: Error) -> Self {
        WalkFailure::Invalid(e)
    }
}

/// Vertex labels assigned so far together with every walk that produced them.
#[derive(Clone, Debug)]
pub struct Labelling<L> {
    vlabels: Vec<Option<i64>>,
    /// `positive[j]` holds the vertex labelled `j + 1`.
    positive: Vec<usize>,
    /// `nonpositive[j]` holds the vertex labelled `-j`.
    nonpositive: Vec<usize>,
    find_traces: Vec<WalkTrace<L>>,
    ofind_traces: Vec<WalkTrace<L>>,
    wrapped: bool,
}

impl<L: Copy + PartialOrd> Labelling<L> {
    pub fn new(point: usize) -> Self {
        let mut vlabels = vec![None; point + 1];
        vlabels[point] = Some(1);
        Labelling {
            vlabels,
            positive: vec![point],
            nonpositive: Vec::new(),
            find_traces: Vec::new(),
            ofind_traces: Vec::new(),
            wrapped: false,
        }
    }

    /// Resumes from an existing labelling, which must be `1..=a` and
    /// `0, -1, .., -b` on some vertices with `1` on the point.
    pub fn from_vlabels(point: usize, vlabels: &[Option<i64>]) -> Result<Self> {
        if vlabels[point].is_some_and(|l| l != 1) {
            return Err(Error::Malformed("the pointed vertex must carry label 1".into()));
        }
        let mut out = Labelling::new(point);
        out.vlabels = vlabels.to_vec();
        out.vlabels[point] = Some(1);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (v, l) in out.vlabels.iter().enumerate() {
            match *l {
                Some(l) if l >= 1 => pos.push((l, v)),
                Some(l) => neg.push((-l, v)),
                None => {}
            }
        }
        pos.sort_unstable();
        neg.sort_unstable();
        let consecutive = |xs: &[(i64, usize)], first: i64| {
            xs.iter().enumerate().all(|(j, &(l, _))| l == first + j as i64)
        };
        if !consecutive(&pos, 1) || !consecutive(&neg, 0) {
            return Err(Error::Malformed(
                "existing vertex labels must form 1..a and 0..-b".into(),
            ));
        }
        out.positive = pos.into_iter().map(|p| p.1).collect();
        out.nonpositive = neg.into_iter().map(|p| p.1).collect();
        Ok(out)
    }

    pub fn vlabels(&self) -> &[Option<i64>] {
        &self.vlabels
    }

    pub fn label_of(&self, v: usize) -> Option<i64> {
        self.vlabels.get(v).copied().flatten()
    }

    pub fn vertex_of(&self, label: i64) -> Option<usize> {
        if label >= 1 {
            self.positive.get(label as usize - 1).copied()
        } else {
            self.nonpositive.get((-label) as usize).copied()
        }
    }

    /// Largest positive label assigned.
    pub fn max_label(&self) -> i64 {
        self.positive.len() as i64
    }

    /// Smallest label assigned (1 if `OFind` has not run).
    pub fn min_label(&self) -> i64 {
        1 - self.nonpositive.len() as i64
    }

    pub fn find_traces(&self) -> &[WalkTrace<L>] {
        &self.find_traces
    }

    pub fn ofind_traces(&self) -> &[WalkTrace<L>] {
        &self.ofind_traces
    }

    /// The `Find` walk from `i` to `i+1` (`i >= 1`) or the `OFind` walk from
    /// `i+1` to `i` (`i <= 0`).
    pub fn trace(&self, i: i64) -> Option<&WalkTrace<L>> {
        if i >= 1 {
            self.find_traces.get(i as usize - 1)
        } else {
            self.ofind_traces.get((-i) as usize)
        }
    }

    /// Whether a walk has come back to the pointed vertex after every vertex
    /// of a finite tree was labelled.
    pub fn wrapped(&self) -> bool {
        self.wrapped
    }

    pub fn labelled_count(&self) -> usize {
        self.positive.len() + self.nonpositive.len()
    }

    /// Runs `Find` until labels `1..=k` are assigned.
    pub fn find_to<E: Explore<Label = L>>(
        &mut self,
        t: &mut E,
        k: usize,
        budget: Option<u64>,
    ) -> std::result::Result<(), WalkFailure> {
        if let Some(n) = t.size() {
            if k > n {
                return Err(Error::Capacity {
                    requested: k,
                    available: n,
                }
                .into());
            }
        }
        while self.positive.len() < k {
            let i = self.positive.len() as i64;
            let start = self.positive[i as usize - 1];
            let trace = walk(t, start, i, Direction::Find, budget)?;
            self.settle(t, trace, i + 1)?;
        }
        Ok(())
    }

    /// Runs `OFind` until labels `0, -1, .., -k` are assigned.
    pub fn ofind_to<E: Explore<Label = L>>(
        &mut self,
        t: &mut E,
        k: usize,
        budget: Option<u64>,
    ) -> std::result::Result<(), WalkFailure> {
        if let Some(n) = t.size() {
            if k >= n {
                return Err(Error::Capacity {
                    requested: k + 1,
                    available: n - 1,
                }
                .into());
            }
        }
        while self.nonpositive.len() < k + 1 && !self.wrapped {
            let from = self.min_label();
            let start = self.vertex_of(from).unwrap();
            let trace = walk(t, start, from - 1, Direction::OFind, budget)?;
            self.settle(t, trace, from - 1)?;
        }
        Ok(())
    }

    fn settle<E: Explore<Label = L>>(
        &mut self,
        t: &E,
        trace: WalkTrace<L>,
        label: i64,
    ) -> Result<()> {
        let end = trace.end();
        if end >= self.vlabels.len() {
            self.vlabels.resize(end + 1, None);
        }
        match self.vlabels[end] {
            None => {
                self.vlabels[end] = Some(label);
                if label >= 1 {
                    self.positive.push(end);
                } else {
                    self.nonpositive.push(end);
                }
            }
            Some(existing) => {
                let full = t.size() == Some(self.labelled_count());
                if !(full && end == t.point()) {
                    return Err(Error::LabelConflict {
                        vertex: end,
                        existing,
                        attempted: label,
                    });
                }
                self.wrapped = true;
            }
        }
        match trace.direction {
            Direction::Find => self.find_traces.push(trace),
            Direction::OFind => self.ofind_traces.push(trace),
        }
        Ok(())
    }

    pub fn to_evtree(&self, tree: &PointedTree<L>) -> Result<EvTree<L>> {
        let mut vl = self.vlabels.clone();
        vl.resize(tree.len(), None);
        EvTree::new(tree.clone(), vl)
    }
}

fn walk<E: Explore>(
    t: &mut E,
    start: usize,
    i: i64,
    direction: Direction,
    budget: Option<u64>,
) -> std::result::Result<WalkTrace<E::Label>, WalkFailure> {
    let mut v = start;
    let mut last = None;
    let mut vertices = vec![start];
    let mut edge_labels = Vec::new();
    loop {
        let step = match direction {
            Direction::Find => t.ascend(v, last),
            Direction::OFind => t.descend(v, last),
        };
        let Some((label, w)) = step else { break };
        v = w;
        last = Some(label);
        vertices.push(w);
        edge_labels.push(label);
        if budget.is_some_and(|b| edge_labels.len() as u64 > b) {
            let target = match direction {
                Direction::Find => i + 1,
                Direction::OFind => i,
            };
            return Err(WalkFailure::Budget {
                label: target,
                steps: edge_labels.len() as u64,
            });
        }
    }
    Ok(WalkTrace {
        i,
        direction,
        vertices,
        edge_labels,
    })
}

fn finite(e: WalkFailure) -> Error {
    match e {
        WalkFailure::Invalid(e) => e,
        WalkFailure::Budget { .. } => unreachable!("finite walks carry no budget"),
    }
}

fn resume<L: Copy + PartialOrd>(t: &EvTree<L>) -> Result<Labelling<L>> {
    let point = t.tree.point();
    let mut vl = t.vlabels().to_vec();
    if vl[point].is_none() {
        vl[point] = Some(1);
    }
    Labelling::from_vlabels(point, &vl)
}

/// `Find_k`: assigns labels `1..=k`. Existing labels on `t` are kept and the
/// walk resumes from the largest positive one.
pub fn find_k<L: Copy + PartialOrd>(t: &EvTree<L>, k: usize) -> Result<(EvTree<L>, Labelling<L>)> {
    let mut lab = resume(t)?;
    lab.find_to(&mut &t.tree, k, None).map_err(finite)?;
    Ok((lab.to_evtree(&t.tree)?, lab))
}

/// `OFind_k`: assigns labels `0, -1, .., -k`. On a finite tree a walk that
/// returns to the pointed vertex once all vertices are labelled ends the run.
pub fn ofind_k<L: Copy + PartialOrd>(t: &EvTree<L>, k: usize) -> Result<(EvTree<L>, Labelling<L>)> {
    let mut lab = resume(t)?;
    lab.ofind_to(&mut &t.tree, k, None).map_err(finite)?;
    Ok((lab.to_evtree(&t.tree)?, lab))
}

/// `Find_{⌊n/2⌋} ∘ OFind_{⌊(n-1)/2⌋}`, labelling every vertex with
/// `-⌊(n-1)/2⌋ ..= ⌊n/2⌋`.
pub fn full_relabel<L: Copy + PartialOrd>(t: &PointedTree<L>) -> Result<EvTree<L>> {
    let n = t.len();
    if n < 2 {
        return Err(Error::Domain("full relabelling needs at least 2 vertices".into()));
    }
    let mut lab = Labelling::new(t.point());
    let mut e = t;
    lab.ofind_to(&mut e, (n - 1) / 2, None).map_err(finite)?;
    lab.find_to(&mut e, n / 2, None).map_err(finite)?;
    lab.to_evtree(t)
}

/// `Find_k` on a plane tree, keeping the planar structure.
pub fn find_plane<L: Copy + PartialOrd>(t: &LabelledPlaneTree<L>, k: usize) -> Result<LabelledPlaneTree<L>> {
    let mut lab = Labelling::new(0);
    lab.find_to(&mut &*t, k, None).map_err(finite)?;
    let mut out = t.clone();
    let mut vl = lab.vlabels().to_vec();
    vl.resize(t.tree.len(), None);
    out.vlabels = vl;
    Ok(out)
}

/// Writes one CSV row per walk: `i,K_i,vertices,edge_labels` with the two
/// lists space separated.
pub fn write_traces_csv<W: Write, L: Display>(mut w: W, traces: &[WalkTrace<L>]) -> Result<()> {
    writeln!(w, "i,K_i,vertices,edge_labels")?;
    for t in traces {
        let vs: Vec<String> = t.vertices.iter().map(|v| v.to_string()).collect();
        let ls: Vec<String> = t.edge_labels.iter().map(|l| l.to_string()).collect();
        writeln!(w, "{},{},{},{}", t.i, t.len(), vs.join(" "), ls.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{shape, Edge, PlaneTree};

    /// Ten-vertex worked example; ids are the drawn vertex numbers minus one.
    pub(crate) fn example_tree() -> PointedTree<f64> {
        let edges = [
            (1, 5, 0.4),
            (2, 3, 0.5),
            (2, 5, 0.7),
            (5, 6, 0.2),
            (4, 5, 0.9),
            (1, 10, 0.95),
            (1, 8, 0.6),
            (8, 9, 0.1),
            (8, 7, 0.8),
        ]
        .iter()
        .map(|&(u, v, label)| Edge {
            u: u - 1,
            v: v - 1,
            label,
        })
        .collect();
        PointedTree::new(10, 0, edges).unwrap()
    }

    #[test]
    fn example_tree_find4() {
        let (t, lab) = find_k(&EvTree::unlabelled(example_tree()), 4).unwrap();
        let expect = [(0, 1), (1, 2), (2, 3), (3, 4)];
        for (v, l) in expect {
            assert_eq!(t.label_of(v), Some(l));
        }
        assert_eq!(t.vlabels().iter().flatten().count(), 4);
        let tr = lab.trace(1).unwrap();
        assert_eq!(tr.vertices, vec![0, 4, 1]);
        assert_eq!(tr.edge_labels, vec![0.4, 0.7]);
        assert_eq!(lab.trace(3).unwrap().edge_labels, vec![0.5, 0.7, 0.9]);
    }

    #[test]
    fn example_tree_ofind4() {
        let (t, lab) = ofind_k(&EvTree::unlabelled(example_tree()), 4).unwrap();
        let expect = [(0, 1), (9, 0), (8, -1), (7, -2), (6, -3), (5, -4)];
        for (v, l) in expect {
            assert_eq!(t.label_of(v), Some(l));
        }
        assert_eq!(t.vlabels().iter().flatten().count(), 6);
        assert_eq!(lab.ofind_traces().len(), 5);
        let last = lab.trace(-4).unwrap();
        assert_eq!(last.edge_labels, vec![0.8, 0.6, 0.4, 0.2]);
    }

    #[test]
    fn trivial_cases() {
        let single = PointedTree::<f64>::new(1, 0, vec![]).unwrap();
        let (t, _) = find_k(&EvTree::unlabelled(single), 1).unwrap();
        assert_eq!(t.label_of(0), Some(1));

        let edge = PointedTree::new(2, 0, vec![Edge { u: 0, v: 1, label: 1u32 }]).unwrap();
        let (t, _) = ofind_k(&EvTree::unlabelled(edge.clone()), 0).unwrap();
        assert_eq!(t.label_of(1), Some(0));
        let full = full_relabel(&edge).unwrap();
        assert_eq!(full.vlabels(), &[Some(1), Some(0)]);
    }

    #[test]
    fn capacity_errors() {
        let t = EvTree::unlabelled(example_tree());
        assert!(matches!(find_k(&t, 11), Err(Error::Capacity { .. })));
        assert!(matches!(ofind_k(&t, 10), Err(Error::Capacity { .. })));
        assert!(find_k(&t, 10).is_ok());
    }

    #[test]
    fn resumes_partial_labelling() {
        let t = EvTree::unlabelled(example_tree());
        let (half, _) = find_k(&t, 2).unwrap();
        let (rest, _) = find_k(&half, 5).unwrap();
        let (direct, _) = find_k(&t, 5).unwrap();
        assert_eq!(rest, direct);
    }

    #[test]
    fn plane_and_shape_commute() {
        // children in arbitrary planar order
        let words = vec![
            vec![],
            vec![1],
            vec![2],
            vec![3],
            vec![1, 1],
            vec![1, 2],
            vec![1, 3],
            vec![1, 2, 1],
            vec![3, 1],
            vec![3, 2],
        ];
        let labels = [None, Some(0.6), Some(0.4), Some(0.95), Some(0.1), Some(0.2), Some(0.9), Some(0.5), Some(0.8), Some(0.7)];
        let lp = LabelledPlaneTree::new(PlaneTree::from_words(&words).unwrap(), labels.to_vec()).unwrap();
        for k in 1..=10 {
            let a = shape(&find_plane(&lp, k).unwrap()).unwrap();
            let (b, _) = find_k(&shape(&lp).unwrap(), k).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn trace_csv() {
        let (_, lab) = find_k(&EvTree::unlabelled(example_tree()), 3).unwrap();
        let mut out = Vec::new();
        write_traces_csv(&mut out, lab.find_traces()).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "i,K_i,vertices,edge_labels\n1,2,0 4 1,0.4 0.7\n2,1,1 2,0.5\n"
        );
    }
}
