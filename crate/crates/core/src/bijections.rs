//! Bijections around minimal factorizations: the Dénes readout, the
//! Moszkowski tree `𝓔(F)`, the correspondence `φ` with Cayley trees, the
//! circular chord embedding with its faces, and the duality map `𝓑`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorization::{Alphabet, Factorization, Transposition};
use crate::labelling::{find_k, Labelling};
use crate::tree::{Edge, EvTree, PointedTree};

/// A labelled tree on `{1..n}` with unlabelled edges, stored as sorted
/// `(a, b)` pairs with `a < b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CayleyTree {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl CayleyTree {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 || edges.len() + 1 != n {
            return Err(Error::Malformed(format!(
                "a tree on {n} vertices needs {} edges",
                n.saturating_sub(1)
            )));
        }
        let mut norm: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        if norm.iter().any(|&(a, b)| a == 0 || b > n || a == b) {
            return Err(Error::Malformed("edge endpoints must be distinct labels in 1..=n".into()));
        }
        norm.sort_unstable();
        let t = CayleyTree { n, edges: norm };
        let mut seen = vec![false; n + 1];
        let adj = t.adjacency();
        let mut stack = vec![1];
        seen[1] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count != n {
            return Err(Error::Malformed("edges do not form a tree".into()));
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `adjacency()[v]` lists the neighbours of `v`; index 0 is unused.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n + 1];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Decodes a Prüfer sequence of length `n-2` over `1..=n` in linear time.
    pub fn from_prufer(n: usize, seq: &[usize]) -> Result<Self> {
        if n < 2 || seq.len() != n - 2 {
            return Err(Error::Malformed(format!(
                "a Prüfer sequence for n = {n} has length {}",
                n.saturating_sub(2)
            )));
        }
        if seq.iter().any(|&x| x == 0 || x > n) {
            return Err(Error::Malformed("Prüfer entries must lie in 1..=n".into()));
        }
        let parent = prufer_parents(n, seq);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (v.min(parent[v]), v.max(parent[v]))).collect();
        edges.sort_unstable();
        Ok(CayleyTree { n, edges })
    }

    pub fn to_prufer(&self) -> Vec<usize> {
        let n = self.n;
        if n <= 2 {
            return Vec::new();
        }
        let adj = self.adjacency();
        let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
        let mut removed = vec![false; n + 1];
        let neighbour = |v: usize, removed: &[bool]| adj[v].iter().copied().find(|&w| !removed[w]).unwrap();
        let mut seq = Vec::with_capacity(n - 2);
        let mut ptr = 1;
        while degree[ptr] != 1 {
            ptr += 1;
        }
        let mut leaf = ptr;
        for _ in 0..n - 2 {
            let next = neighbour(leaf, &removed);
            removed[leaf] = true;
            seq.push(next);
            degree[next] -= 1;
            if next < ptr && degree[next] == 1 {
                leaf = next;
            } else {
                ptr += 1;
                while removed[ptr] || degree[ptr] != 1 {
                    ptr += 1;
                }
                leaf = ptr;
            }
        }
        seq
    }
}

/// Parent pointers of the tree encoded by a valid Prüfer sequence, rooted at
/// `n` (`parent[n] = 0`, index 0 unused). Linear time.
pub fn prufer_parents(n: usize, seq: &[usize]) -> Vec<usize> {
    let mut degree = vec![1usize; n + 1];
    for &x in seq {
        degree[x] += 1;
    }
    let mut parent = vec![0usize; n + 1];
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &x in seq {
        parent[leaf] = x;
        degree[x] -= 1;
        if x < ptr && degree[x] == 1 {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    parent[leaf] = n;
    parent
}

/// Reads a transposition sequence off a fully vertex-labelled tree whose edge
/// labels are `1..=m`: position `k` holds the two vertex labels of edge `k`.
pub fn denes_to_factorization(t: &EvTree<u32>) -> Result<Vec<Transposition>> {
    let m = t.tree.edges().len();
    let mut taus: Vec<Option<Transposition>> = vec![None; m];
    for e in t.tree.edges() {
        let k = e.label as usize;
        if k == 0 || k > m || taus[k - 1].is_some() {
            return Err(Error::Malformed(format!("edge labels must be exactly 1..={m}")));
        }
        let (Some(a), Some(b)) = (t.label_of(e.u), t.label_of(e.v)) else {
            return Err(Error::Malformed("every vertex must carry a label".into()));
        };
        taus[k - 1] = Some(Transposition::new(a, b)?);
    }
    Ok(taus.into_iter().map(Option::unwrap).collect())
}

/// `Tree(F)`: vertex `label - min_label` carries `label`, edge `k` joins the
/// endpoints of `τ_k`, and the vertex labelled 1 is pointed.
pub fn tree_of(f: &Factorization) -> Result<EvTree<u32>> {
    f.ensure_minimal()?;
    let min = f.min_label();
    let n = f.n();
    let edges = f
        .taus()
        .iter()
        .enumerate()
        .map(|(k, t)| Edge {
            u: (t.a() - min) as usize,
            v: (t.b() - min) as usize,
            label: k as u32 + 1,
        })
        .collect();
    let tree = PointedTree::new(n, (1 - min) as usize, edges)?;
    let vlabels = (0..n).map(|v| Some(v as i64 + min)).collect();
    EvTree::new(tree, vlabels)
}

/// `𝓔(F)`: `Tree(F)` with every vertex label forgotten except for the point.
pub fn moszkowski_forward(f: &Factorization) -> Result<PointedTree<u32>> {
    Ok(tree_of(f)?.forget_vertex_labels())
}

fn check_edge_labels(t: &PointedTree<u32>) -> Result<()> {
    let m = t.edges().len();
    let mut seen = vec![false; m + 1];
    for e in t.edges() {
        let k = e.label as usize;
        if k == 0 || k > m || std::mem::replace(&mut seen[k], true) {
            return Err(Error::Malformed(format!("edge labels must be exactly 1..={m}")));
        }
    }
    Ok(())
}

/// Inverse of `𝓔`: `Find_n` recovers the vertex labels, then the Dénes readout
/// gives the factorization.
pub fn moszkowski_inverse(t: &PointedTree<u32>) -> Result<Factorization> {
    check_edge_labels(t)?;
    let n = t.len();
    let (labelled, _) = find_k(&EvTree::unlabelled(t.clone()), n)?;
    let f = Factorization::new(n, Alphabet::Plain, denes_to_factorization(&labelled)?)?;
    debug_assert!(f.is_minimal());
    Ok(f)
}

/// Faster `𝓔⁻¹` for hot loops: same walks, no trace bookkeeping kept around.
pub(crate) fn moszkowski_inverse_fast(t: &PointedTree<u32>) -> Factorization {
    let n = t.len();
    let mut lab = Labelling::<u32>::new(t.point());
    let mut e = t;
    if lab.find_to(&mut e, n, None).is_err() {
        unreachable!("Find_n succeeds on every finite tree");
    }
    let mut taus = vec![Transposition::new(0, 1).unwrap(); n - 1];
    for edge in t.edges() {
        let a = lab.label_of(edge.u).unwrap();
        let b = lab.label_of(edge.v).unwrap();
        taus[edge.label as usize - 1] = Transposition::new(a, b).unwrap();
    }
    Factorization::new(n, Alphabet::Plain, taus).expect("labels lie in 1..=n")
}

/// `φ`: label the point 1 and every other vertex with one more than the label
/// of its parent-side edge.
pub fn phi(t: &PointedTree<u32>) -> Result<CayleyTree> {
    check_edge_labels(t)?;
    let n = t.len();
    let mut label = vec![0usize; n];
    label[t.point()] = 1;
    let mut queue = VecDeque::from([t.point()]);
    let mut seen = vec![false; n];
    seen[t.point()] = true;
    while let Some(u) = queue.pop_front() {
        for &(l, w) in t.neighbours(u) {
            if !seen[w] {
                seen[w] = true;
                label[w] = l as usize + 1;
                queue.push_back(w);
            }
        }
    }
    let edges: Vec<(usize, usize)> = t.edges().iter().map(|e| (label[e.u], label[e.v])).collect();
    CayleyTree::new(n, &edges)
}

/// `φ⁻¹`: point vertex 1 and give the edge from `v` to its parent label `v-1`.
/// Vertex `v` becomes id `v-1`.
pub fn phi_inverse(c: &CayleyTree) -> PointedTree<u32> {
    let n = c.n();
    let adj = c.adjacency();
    let mut parent = vec![0usize; n + 1];
    let mut queue = VecDeque::from([1usize]);
    parent[1] = 1;
    let mut edges = Vec::with_capacity(n - 1);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if parent[w] == 0 {
                parent[w] = u;
                edges.push(Edge {
                    u: u - 1,
                    v: w - 1,
                    label: w as u32 - 1,
                });
                queue.push_back(w);
            }
        }
    }
    PointedTree::new(n, 0, edges).expect("a Cayley tree yields a pointed tree")
}

/// One face of the circular embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    /// The face contains the arc from `arc` to `arc + 1` (with `n + 1 = 1`).
    pub arc: usize,
    /// Boundary chord labels in clockwise order starting from the arc.
    pub edges: Vec<u32>,
}

/// Chords `𝓔(F)` drawn with vertex `j` at angle `-2π(j-1)/n`, and the `n`
/// faces of the disk they cut out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircularEmbedding {
    n: usize,
    /// `chords[k-1]` holds the endpoints of the chord labelled `k`.
    chords: Vec<(usize, usize)>,
    /// `faces[j-1]` is the face at arc `j`.
    faces: Vec<Face>,
}

impl CircularEmbedding {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chords(&self) -> &[(usize, usize)] {
        &self.chords
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_at_arc(&self, j: usize) -> &Face {
        &self.faces[j - 1]
    }

    pub fn faces_json(&self) -> String {
        serde_json::to_string(&self.faces).expect("faces serialize")
    }
}

#[derive(Clone, Copy)]
enum Corner {
    Arc,
    Chord { to: usize, label: u32 },
}

/// Faces of a chord diagram on `n` circle points, by traversing the rotation
/// system. Chords are `(a, b, label)` with `1 <= a, b <= n`.
pub fn faces_of_chords(n: usize, chords: &[(usize, usize, u32)]) -> Result<CircularEmbedding> {
    if n < 2 {
        return Err(Error::Domain("a circular embedding needs n >= 2".into()));
    }
    // at vertex v: arc to v+1 has key 0, chord to w key (w-v) mod n, arc to v-1 key n
    let key = |v: usize, w: usize| (w + n - v) % n;
    let mut rotation: Vec<Vec<(usize, Corner)>> = vec![Vec::new(); n + 1];
    for v in 1..=n {
        rotation[v].push((0, Corner::Arc));
        rotation[v].push((n, Corner::Arc));
    }
    for &(a, b, label) in chords {
        if a == 0 || b == 0 || a > n || b > n || a == b {
            return Err(Error::Malformed(format!("bad chord {a}-{b}")));
        }
        rotation[a].push((key(a, b), Corner::Chord { to: b, label }));
        rotation[b].push((key(b, a), Corner::Chord { to: a, label }));
    }
    for r in &mut rotation {
        r.sort_by_key(|c| c.0);
        if r.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Malformed("parallel chords".into()));
        }
    }
    let mut visited: Vec<Vec<bool>> = rotation.iter().map(|r| vec![false; r.len()]).collect();
    let mut faces = Vec::with_capacity(n);
    for j in 1..=n {
        let mut v = j % n + 1;
        let mut key_in = n;
        let mut edges = Vec::new();
        loop {
            let r = &rotation[v];
            let idx = r.partition_point(|c| c.0 < key_in) - 1;
            match r[idx].1 {
                Corner::Arc => {
                    if v != j {
                        return Err(Error::CrossingChords);
                    }
                    break;
                }
                Corner::Chord { to, label } => {
                    if std::mem::replace(&mut visited[v][idx], true) {
                        return Err(Error::CrossingChords);
                    }
                    edges.push(label);
                    key_in = key(to, v);
                    v = to;
                }
            }
        }
        faces.push(Face { arc: j, edges });
    }
    let unvisited = visited
        .iter()
        .zip(&rotation)
        .any(|(vis, r)| vis.iter().zip(r).any(|(&seen, c)| !seen && matches!(c.1, Corner::Chord { .. })));
    if unvisited {
        return Err(Error::CrossingChords);
    }
    let mut by_label: Vec<(usize, usize)> = vec![(0, 0); chords.len()];
    for &(a, b, label) in chords {
        if let Some(slot) = by_label.get_mut(label as usize - 1) {
            *slot = (a.min(b), a.max(b));
        }
    }
    Ok(CircularEmbedding {
        n,
        chords: by_label,
        faces,
    })
}

fn require_plain(f: &Factorization) -> Result<()> {
    if f.alphabet() != Alphabet::Plain {
        return Err(Error::AlphabetMismatch {
            expected: Alphabet::Plain.name(),
            found: f.alphabet().name(),
        });
    }
    Ok(())
}

/// Faces of the circular drawing of `𝓔(F)`. Boundary labels are checked to
/// decrease clockwise from the arc.
pub fn compute_faces(f: &Factorization) -> Result<CircularEmbedding> {
    require_plain(f)?;
    f.ensure_minimal()?;
    let chords: Vec<(usize, usize, u32)> = f
        .taus()
        .iter()
        .enumerate()
        .map(|(k, t)| (t.a() as usize, t.b() as usize, k as u32 + 1))
        .collect();
    let emb = faces_of_chords(f.n(), &chords)?;
    for face in &emb.faces {
        if face.edges.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::NotMinimal);
        }
    }
    Ok(emb)
}

/// The dual of a circular embedding: dual vertex `j` (id `j-1`) is the face at
/// arc `j`, pointed at dual vertex 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DualTree {
    pub tree: PointedTree<u32>,
    pub symmetrized: bool,
}

impl DualTree {
    /// Edges as `(dual vertex, dual vertex, label)` with 1-based vertices.
    pub fn edge_table(&self) -> Vec<(usize, usize, u32)> {
        let mut out: Vec<_> = self
            .tree
            .edges()
            .iter()
            .map(|e| (e.u.min(e.v) + 1, e.u.max(e.v) + 1, e.label))
            .collect();
        out.sort_by_key(|e| e.2);
        out
    }

    pub fn as_evtree(&self) -> EvTree<u32> {
        let n = self.tree.len();
        EvTree::new(self.tree.clone(), (1..=n as i64).map(Some).collect()).unwrap()
    }
}

/// The dual `𝓔†(F)`, its symmetrized version (labels `ℓ ↦ n - ℓ`), and the
/// factorization `𝓑(F)` that the symmetrized dual encodes.
pub fn gy_dual(f: &Factorization) -> Result<(DualTree, DualTree, Factorization)> {
    let emb = compute_faces(f)?;
    let n = f.n();
    let mut sides: Vec<Vec<usize>> = vec![Vec::with_capacity(2); n - 1];
    for face in &emb.faces {
        for &l in &face.edges {
            sides[l as usize - 1].push(face.arc);
        }
    }
    let edges: Vec<Edge<u32>> = sides
        .iter()
        .enumerate()
        .map(|(k, s)| {
            debug_assert_eq!(s.len(), 2);
            Edge {
                u: s[0] - 1,
                v: s[1] - 1,
                label: k as u32 + 1,
            }
        })
        .collect();
    let dual = PointedTree::new(n, 0, edges)?;
    let sym = dual.map_labels(|l| n as u32 - l)?;
    let dual = DualTree {
        tree: dual,
        symmetrized: false,
    };
    let sym = DualTree {
        tree: sym,
        symmetrized: true,
    };
    let b = Factorization::new(n, Alphabet::Plain, denes_to_factorization(&sym.as_evtree())?)?;
    b.ensure_minimal()?;
    Ok((dual, sym, b))
}

/// `𝓑(F)` alone.
pub fn dual_bijection(f: &Factorization) -> Result<Factorization> {
    Ok(gy_dual(f)?.2)
}

/// Graphviz overlay of `𝓔(F)` (vertices `p1..pn`) and its dual (`d1..dn`).
pub fn dual_dot(f: &Factorization) -> Result<String> {
    let (dual, _, _) = gy_dual(f)?;
    let n = f.n();
    let mut out = String::from("graph dual {\n  layout=neato;\n");
    for j in 1..=n {
        let angle = -2.0 * std::f64::consts::PI * (j as f64 - 1.0) / n as f64;
        let dangle = angle - std::f64::consts::PI / (2.0 * n as f64);
        let _ = writeln!(
            out,
            "  p{j} [label=\"{j}\", pos=\"{:.3},{:.3}!\"];",
            3.0 * angle.cos(),
            3.0 * angle.sin()
        );
        let _ = writeln!(
            out,
            "  d{j} [label=\"{j}\", shape=box, color=red, pos=\"{:.3},{:.3}!\"];",
            2.4 * dangle.cos(),
            2.4 * dangle.sin()
        );
    }
    for (k, t) in f.taus().iter().enumerate() {
        let _ = writeln!(out, "  p{} -- p{} [label=\"{}\"];", t.a(), t.b(), k + 1);
    }
    for (a, b, l) in dual.edge_table() {
        let _ = writeln!(out, "  d{a} -- d{b} [label=\"{l}\", color=red];");
    }
    out.push_str("}\n");
    Ok(out)
}
