//! Exhaustive enumeration with exact tallies, closed-form limit laws, and a
//! Monte Carlo harness comparing finite and limiting samples to them.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::ln_factorial;

use crate::bijections::moszkowski_inverse_fast;
use crate::error::{Error, Result};
use crate::factorization::Factorization;
use crate::labelling::Labelling;
use crate::random::{pointed_tree_from_prufer, sample_pointed_tree, LazyKestenTree, LimitRun, RandomSource};
use crate::tree::PointedTree;

/// Largest `n` enumerated by default (`9^7` factorizations).
pub const ENUMERATION_CAP: usize = 9;

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    Ok(())
}

/// Every minimal factorization of `(1..n)` exactly once, in Prüfer order.
pub struct FactorizationIter {
    n: usize,
    seq: Vec<usize>,
    done: bool,
}

impl Iterator for FactorizationIter {
    type Item = Factorization;

    fn next(&mut self) -> Option<Factorization> {
        if self.done {
            return None;
        }
        let f = moszkowski_inverse_fast(&pointed_tree_from_prufer(self.n, &self.seq));
        self.done = !advance(&mut self.seq, self.n);
        Some(f)
    }
}

/// Odometer step over `{1..n}^len`; false once it wraps.
fn advance(seq: &mut [usize], n: usize) -> bool {
    for x in seq.iter_mut().rev() {
        if *x < n {
            *x += 1;
            return true;
        }
        *x = 1;
    }
    false
}

pub fn enumerate_factorizations(n: usize) -> Result<FactorizationIter> {
    enumerate_factorizations_capped(n, ENUMERATION_CAP)
}

pub fn enumerate_factorizations_capped(n: usize, cap: usize) -> Result<FactorizationIter> {
    check_cap(n, cap)?;
    Ok(FactorizationIter {
        n,
        seq: vec![1; n - 2],
        done: false,
    })
}

/// Parallel fold over all of `𝔐ₙ`, split by Prüfer prefixes. `reduce` must be
/// associative and commutative for the result not to depend on scheduling.
pub fn fold_factorizations<T, I, F, R>(n: usize, cap: usize, identity: I, fold: F, reduce: R) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(T, &Factorization) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    check_cap(n, cap)?;
    let len = n - 2;
    let plen = len.min(2);
    let chunks = n.pow(plen as u32);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut seq = vec![1; len];
            let mut c = c;
            for x in seq[..plen].iter_mut().rev() {
                *x = c % n + 1;
                c /= n;
            }
            let mut acc = identity();
            loop {
                let f = moszkowski_inverse_fast(&pointed_tree_from_prufer(n, &seq));
                acc = fold(acc, &f);
                if !advance(&mut seq[plen..], n) {
                    break;
                }
            }
            acc
        })
        .reduce(&identity, &reduce))
}

pub fn count_factorizations(n: usize) -> Result<u64> {
    fold_factorizations(n, ENUMERATION_CAP, || 0u64, |c, _| c + 1, |a, b| a + b)
}

/// Pairs of local statistics tallied by [`exact_joint_pgp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatPair {
    /// `(#T₁, #M₁)`
    T1M1,
    /// `(#T₁, #M_j)`
    T1Mj(usize),
    /// `(#T_i, #T_j)`
    TiTj(usize, usize),
}

impl StatPair {
    fn check(self, n: usize) -> Result<()> {
        let ok = |i: usize| (1..=n).contains(&i);
        let valid = match self {
            StatPair::T1M1 => true,
            StatPair::T1Mj(j) => ok(j),
            StatPair::TiTj(i, j) => ok(i) && ok(j),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Domain(format!("indices of {self} must lie in 1..={n}")))
        }
    }

    fn read(self, f: &Factorization) -> (usize, usize) {
        let c = f.local_counts();
        let (t, m) = (|i: usize| c.touch(i as i64) as usize, |i: usize| c.moves(i as i64) as usize);
        match self {
            StatPair::T1M1 => (t(1), m(1)),
            StatPair::T1Mj(j) => (t(1), m(j)),
            StatPair::TiTj(i, j) => (t(i), t(j)),
        }
    }
}

impl fmt::Display for StatPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatPair::T1M1 => write!(f, "T1_M1"),
            StatPair::T1Mj(j) => write!(f, "T1_M{j}"),
            StatPair::TiTj(i, j) => write!(f, "T{i}_T{j}"),
        }
    }
}

/// Exact joint law of two statistics over `𝔐ₙ`: `counts[a][b]` factorizations
/// out of `total = n^{n-2}` have the pair `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariatePGP {
    pub n: usize,
    pub total: u64,
    pub counts: Vec<Vec<u64>>,
}

impl BivariatePGP {
    pub fn prob(&self, a: usize, b: usize) -> Ratio<u64> {
        let c = self.counts.get(a).and_then(|r| r.get(b)).copied().unwrap_or(0);
        Ratio::new(c, self.total)
    }

    /// Nonzero coefficients `(a, b, P(a, b))` in lexicographic order.
    pub fn coefficients(&self) -> Vec<(usize, usize, Ratio<u64>)> {
        let mut out = Vec::new();
        for (a, row) in self.counts.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                if c > 0 {
                    out.push((a, b, Ratio::new(c, self.total)));
                }
            }
        }
        out
    }

    pub fn marginal_x(&self, a: usize) -> Ratio<u64> {
        Ratio::new(self.counts[a].iter().sum(), self.total)
    }

    pub fn marginal_y(&self, b: usize) -> Ratio<u64> {
        Ratio::new(self.counts.iter().map(|r| r[b]).sum(), self.total)
    }

    pub fn total_mass(&self) -> Ratio<u64> {
        self.coefficients()
            .into_iter()
            .fold(Ratio::from_integer(0), |acc, c| acc + c.2)
    }

    pub fn histogram_rows(&self, statistic: &str) -> Vec<HistogramRow> {
        self.coefficients()
            .into_iter()
            .map(|(a, b, p)| HistogramRow {
                statistic: statistic.to_string(),
                value1: a as u32,
                value2: Some(b as u32),
                probability: *p.numer() as f64 / *p.denom() as f64,
                source: "exact".into(),
                n_or_limit: self.n.to_string(),
            })
            .collect()
    }
}

/// Exact joint law of `pair` by full enumeration.
pub fn exact_joint_pgp(n: usize, pair: StatPair) -> Result<BivariatePGP> {
    exact_joint_pgp_capped(n, pair, ENUMERATION_CAP)
}

pub fn exact_joint_pgp_capped(n: usize, pair: StatPair, cap: usize) -> Result<BivariatePGP> {
    check_cap(n, cap)?;
    pair.check(n)?;
    let zero = || vec![vec![0u64; n + 1]; n + 1];
    let counts = fold_factorizations(
        n,
        cap,
        zero,
        |mut acc, f| {
            let (a, b) = pair.read(f);
            acc[a][b] += 1;
            acc
        },
        |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
            a
        },
    )?;
    let total = counts.iter().flatten().sum();
    Ok(BivariatePGP { n, total, counts })
}

/// Integer coefficients of `xy(n-2+x+y)^{n-2}`, indexed `[a][b]` for `x^a y^b`.
/// Divided by `n^{n-2}` they form the conjectured law of `(#T₁, #M₁)`.
pub fn conjecture_numerators(n: usize) -> Vec<Vec<u128>> {
    let m = n.saturating_sub(2);
    let mut poly = vec![vec![0u128; m + 1]; m + 1];
    poly[0][0] = 1;
    for _ in 0..m {
        let mut next = vec![vec![0u128; m + 1]; m + 1];
        for a in 0..=m {
            for b in 0..=m - a {
                let c = poly[a][b];
                if c == 0 {
                    continue;
                }
                next[a][b] += c * m as u128;
                if a < m {
                    next[a + 1][b] += c;
                }
                if b < m {
                    next[a][b + 1] += c;
                }
            }
        }
        poly = next;
    }
    let mut out = vec![vec![0u128; n + 1]; n + 1];
    for a in 0..=m {
        for b in 0..=m {
            out[a + 1][b + 1] = poly[a][b];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientMismatch {
    pub a: usize,
    pub b: usize,
    pub observed: u64,
    pub expected: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub factorizations: u64,
    pub matches: bool,
    pub mismatches: Vec<CoefficientMismatch>,
}

impl fmt::Display for ConjectureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.matches {
            write!(f, "exact match, {} factorizations", self.factorizations)
        } else {
            writeln!(f, "mismatch at n = {} over {} factorizations", self.n, self.factorizations)?;
            for m in &self.mismatches {
                writeln!(f, "  x^{} y^{}: enumerated {}, expected {}", m.a, m.b, m.observed, m.expected)?;
            }
            Ok(())
        }
    }
}

/// Compares the exact law of `(#T₁, #M₁)` with `xy((n-2+x+y)/n)^{n-2}`
/// coefficient by coefficient.
pub fn verify_conjecture(n: usize) -> Result<ConjectureReport> {
    verify_conjecture_capped(n, ENUMERATION_CAP)
}

pub fn verify_conjecture_capped(n: usize, cap: usize) -> Result<ConjectureReport> {
    let pgp = exact_joint_pgp_capped(n, StatPair::T1M1, cap)?;
    let rhs = conjecture_numerators(n);
    let mut mismatches = Vec::new();
    for a in 0..=n {
        for b in 0..=n {
            let observed = pgp.counts[a][b];
            if observed as u128 != rhs[a][b] {
                mismatches.push(CoefficientMismatch {
                    a,
                    b,
                    observed,
                    expected: rhs[a][b],
                });
            }
        }
    }
    Ok(ConjectureReport {
        n,
        factorizations: pgp.total,
        matches: mismatches.is_empty(),
        mismatches,
    })
}

type Tally = HashMap<Vec<u8>, u64>;

fn merge_tallies(mut a: Tally, b: Tally) -> Tally {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

fn tally_tuples<K>(n: usize, cap: usize, width: usize, keys: K) -> Result<Vec<Tally>>
where
    K: Fn(&crate::factorization::LocalCounts) -> Vec<Vec<u8>> + Sync + Send,
{
    fold_factorizations(
        n,
        cap,
        || vec![Tally::new(); width],
        |mut acc, f| {
            for (t, k) in acc.iter_mut().zip(keys(&f.local_counts())) {
                *t.entry(k).or_insert(0) += 1;
            }
            acc
        },
        |a, b| a.into_iter().zip(b).map(|(x, y)| merge_tallies(x, y)).collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub n: usize,
    pub k: usize,
    pub equal: bool,
    /// Number of distinct tuples in each of the three laws.
    pub support: [usize; 3],
}

/// Exact equality of the laws of `(T₁,M₁,..,T_k,M_k)`,
/// `(M_n,T₁,M₁,..,M_{k-1},T_k)` and `(M_k,T_k,..,M₁,T₁)` over `𝔐ₙ`.
pub fn verify_symmetry(n: usize, k: usize) -> Result<SymmetryReport> {
    check_cap(n, ENUMERATION_CAP)?;
    if k == 0 || k > n {
        return Err(Error::range("k", k as i64, 1, n as i64));
    }
    let tallies = tally_tuples(n, ENUMERATION_CAP, 3, |c| {
        let t = |i: usize| c.touch(i as i64) as u8;
        let m = |i: usize| c.moves(i as i64) as u8;
        let a: Vec<u8> = (1..=k).flat_map(|i| [t(i), m(i)]).collect();
        let mut b = vec![m(n)];
        for i in 1..=k {
            b.push(t(i));
            if i < k {
                b.push(m(i));
            }
        }
        let c: Vec<u8> = (1..=k).rev().flat_map(|i| [m(i), t(i)]).collect();
        vec![a, b, c]
    })?;
    Ok(SymmetryReport {
        n,
        k,
        equal: tallies[0] == tallies[1] && tallies[1] == tallies[2],
        support: [tallies[0].len(), tallies[1].len(), tallies[2].len()],
    })
}

/// Exact equality of the laws of `(#T₁, #M_j)` and `(#T₁, #M_{n+1-j})`.
pub fn verify_horizontal_symmetry(n: usize, j: usize) -> Result<bool> {
    check_cap(n, ENUMERATION_CAP)?;
    if j == 0 || j > n {
        return Err(Error::range("j", j as i64, 1, n as i64));
    }
    let mirror = n + 1 - j;
    let tallies = tally_tuples(n, ENUMERATION_CAP, 2, |c| {
        let t1 = c.touch(1) as u8;
        vec![vec![t1, c.moves(j as i64) as u8], vec![t1, c.moves(mirror as i64) as u8]]
    })?;
    Ok(tallies[0] == tallies[1])
}

/// Closed-form limits of local statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitLaw {
    /// `P(T = j) = e⁻¹/(j-1)!`, the law of `1 + Poisson(1)`.
    MarginalT(u32),
    /// `P(deg = i, dist = h) = e⁻²/((i-1)!(h-1)!)`.
    JointDegDist(u32, u32),
    /// Limit of `P(#T₁ = i, #T₂ = j)`.
    JointTT(u32, u32),
    /// Limit of the probability that `X₁` never drops below 1.
    StaysPositive,
}

fn inv_fact(k: u32) -> f64 {
    (-ln_factorial(k as u64)).exp()
}

pub fn limit_pmf(law: LimitLaw) -> Result<f64> {
    let positive = |xs: &[u32]| {
        if xs.contains(&0) {
            Err(Error::Domain("limit laws are supported on positive integers".into()))
        } else {
            Ok(())
        }
    };
    let e1 = (-1.0f64).exp();
    Ok(match law {
        LimitLaw::MarginalT(j) => {
            positive(&[j])?;
            e1 * inv_fact(j - 1)
        }
        LimitLaw::JointDegDist(i, h) => {
            positive(&[i, h])?;
            e1 * e1 * inv_fact(i - 1) * inv_fact(h - 1)
        }
        LimitLaw::JointTT(i, j) => {
            positive(&[i, j])?;
            let s = (i + j) as f64;
            e1 * e1
                * ((s - 2.0) * inv_fact(i + j - 1) + (s - 1.0) * inv_fact(i) * inv_fact(j)
                    - (s - 1.0) * inv_fact(i + j))
        }
        LimitLaw::StaysPositive => 1.0 - e1,
    })
}

/// Local statistics read around the vertex labelled 1 of one sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LocalObservation {
    /// Degree of the vertex labelled 1 (`#T₁`).
    pub t1: u32,
    /// Distance from 1 to 2, the number of jumps of `X₁` (`#M₁`).
    pub m1: u32,
    /// Degree of the vertex labelled 2 (`#T₂`).
    pub t2: u32,
    /// Whether `X₁` stays at or above 1; `None` when not computed.
    pub stays_positive: Option<bool>,
}

/// Where samples come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// `𝓔(F̃)` for a uniform `F ∈ 𝔐ₙ`.
    Finite(usize),
    /// The Kesten tree with uniform edge labels.
    Kesten,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Finite(_) => write!(f, "finite"),
            Source::Kesten => write!(f, "kesten"),
        }
    }
}

impl Source {
    pub fn n_or_limit(&self) -> String {
        match self {
            Source::Finite(n) => n.to_string(),
            Source::Kesten => "limit".into(),
        }
    }
}

/// Labels spread out from the point until the walk from 1 to 2 is fully
/// labelled, or a vertex on it turns out non-positive.
trait Grow {
    fn label(&self, v: usize) -> Option<i64>;
    /// Labels `-k..=k+1` where possible; false once nothing more can be added.
    fn grow(&mut self, k: usize) -> Result<bool>;
}

/// `None` once the radius would pass `cap`.
fn stays_positive<G: Grow>(g: &mut G, path: &[usize], cap: Option<usize>) -> Result<Option<bool>> {
    let mut k = 2;
    loop {
        let mut complete = true;
        for &v in path {
            match g.label(v) {
                Some(l) if l <= 0 => return Ok(Some(false)),
                Some(_) => {}
                None => complete = false,
            }
        }
        if complete {
            return Ok(Some(true));
        }
        if cap.is_some_and(|c| k > c) {
            return Ok(None);
        }
        if !g.grow(k)? {
            return Err(Error::Malformed("labelling ended with unlabelled vertices".into()));
        }
        k *= 2;
    }
}

/// Whether `X₁` stays positive on the Kesten tree, read off the spine: true
/// when the smallest root edge leads off the spine, otherwise exactly when
/// the second spine edge carries the smaller label. Both edges are explored
/// by the walk from 1 to 2.
pub fn spine_stays_positive(t: &LazyKestenTree) -> bool {
    let first = t
        .children(0)
        .expect("root expanded")
        .into_iter()
        .min_by(|&a, &b| t.parent_label(a).unwrap().total_cmp(&t.parent_label(b).unwrap()))
        .expect("the root has a child");
    if !t.is_special(first) {
        return true;
    }
    let next = t.spine_child(first).expect("spine vertex on the walk is expanded");
    t.parent_label(next) < t.parent_label(first)
}

struct FiniteGrow<'a> {
    tree: &'a PointedTree<u32>,
    lab: Labelling<u32>,
}

impl Grow for FiniteGrow<'_> {
    fn label(&self, v: usize) -> Option<i64> {
        self.lab.label_of(v)
    }

    fn grow(&mut self, k: usize) -> Result<bool> {
        let n = self.tree.len();
        let (pmax, nmax) = (n / 2, (n - 1) / 2);
        if self.lab.max_label() as usize >= pmax && 1 - self.lab.min_label() as usize > nmax {
            return Ok(false);
        }
        let mut t = self.tree;
        let lift = |r: std::result::Result<(), crate::labelling::WalkFailure>| match r {
            Ok(()) => Ok(()),
            Err(crate::labelling::WalkFailure::Invalid(e)) => Err(e),
            Err(_) => unreachable!("finite walks carry no budget"),
        };
        lift(self.lab.find_to(&mut t, (k + 1).min(pmax), None))?;
        lift(self.lab.ofind_to(&mut t, k.min(nmax), None))?;
        Ok(true)
    }
}

impl Grow for LimitRun {
    fn label(&self, v: usize) -> Option<i64> {
        self.label_of(v)
    }

    fn grow(&mut self, k: usize) -> Result<bool> {
        self.extend(k)?;
        Ok(true)
    }
}

/// One observation of `𝓔(F̃)` for a uniform `F ∈ 𝔐ₙ`, `n >= 4`.
pub fn observe_finite(n: usize, source: RandomSource, with_positive: bool) -> Result<LocalObservation> {
    if n < 4 {
        return Err(Error::Domain("finite-n local statistics need n >= 4".into()));
    }
    let tree = sample_pointed_tree(n, &mut source.rng())?;
    let mut g = FiniteGrow {
        tree: &tree,
        lab: Labelling::new(tree.point()),
    };
    g.grow(1)?;
    let walk = g.lab.trace(1).expect("label 2 assigned").clone();
    let obs = LocalObservation {
        t1: tree.degree(tree.point()) as u32,
        m1: walk.len() as u32,
        t2: tree.degree(walk.end()) as u32,
        stays_positive: None,
    };
    Ok(LocalObservation {
        stays_positive: match with_positive {
            true => stays_positive(&mut g, &walk.vertices, None)?,
            false => None,
        },
        ..obs
    })
}

/// One observation of the Kesten tree.
pub fn observe_kesten(source: RandomSource, with_positive: bool, budget: u64) -> Result<LocalObservation> {
    let mut run = LimitRun::new(source, budget);
    run.extend_find(2)?;
    let walk = run.walk(1)?;
    let obs = LocalObservation {
        t1: run.tree().degree(0).unwrap() as u32,
        m1: walk.len() as u32,
        t2: run.tree().degree(walk.end()).unwrap() as u32,
        stays_positive: None,
    };
    Ok(LocalObservation {
        stays_positive: with_positive.then(|| spine_stays_positive(run.tree())),
        ..obs
    })
}

/// `samples` independent observations; replica `r` uses stream `r` of `seed`,
/// so the output does not depend on the number of worker threads.
pub fn observe_many(
    source: Source,
    samples: u64,
    seed: u64,
    with_positive: bool,
    budget: u64,
) -> Result<Vec<LocalObservation>> {
    (0..samples)
        .into_par_iter()
        .map(|r| {
            let rs = RandomSource::new(seed).with_stream(r);
            match source {
                Source::Finite(n) => observe_finite(n, rs, with_positive),
                Source::Kesten => observe_kesten(rs, with_positive, budget),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    StaysPositive,
    T1Marginal,
    M1Marginal,
    T1M1Joint,
    T1T2Joint,
    DegDistJoint,
}

impl Statistic {
    pub const ALL: [Statistic; 6] = [
        Statistic::StaysPositive,
        Statistic::T1Marginal,
        Statistic::M1Marginal,
        Statistic::T1M1Joint,
        Statistic::T1T2Joint,
        Statistic::DegDistJoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::StaysPositive => "stays-positive",
            Statistic::T1Marginal => "t1-marginal",
            Statistic::M1Marginal => "m1-marginal",
            Statistic::T1M1Joint => "t1-m1-joint",
            Statistic::T1T2Joint => "t1-t2-joint",
            Statistic::DegDistJoint => "deg-dist-joint",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Statistic::ALL.into_iter().find(|st| st.name() == key)
    }

    /// Cells compared against the limit, each with its target probability.
    pub fn cells(self) -> Vec<(Vec<u32>, f64)> {
        let law = |l| limit_pmf(l).expect("cells are positive");
        let grid = |f: fn(u32, u32) -> LimitLaw| {
            (1..=4)
                .flat_map(|i| (1..=4).map(move |h| (i, h)))
                .map(|(i, h)| (vec![i, h], law(f(i, h))))
                .collect()
        };
        match self {
            Statistic::StaysPositive => vec![(vec![1], law(LimitLaw::StaysPositive))],
            Statistic::T1Marginal | Statistic::M1Marginal => {
                (1..=6).map(|j| (vec![j], law(LimitLaw::MarginalT(j)))).collect()
            }
            Statistic::T1M1Joint | Statistic::DegDistJoint => grid(LimitLaw::JointDegDist),
            Statistic::T1T2Joint => grid(LimitLaw::JointTT),
        }
    }

    fn hit(self, o: &LocalObservation, cell: &[u32]) -> bool {
        match self {
            Statistic::StaysPositive => o.stays_positive.expect("computed") == (cell[0] == 1),
            Statistic::T1Marginal => o.t1 == cell[0],
            Statistic::M1Marginal => o.m1 == cell[0],
            Statistic::T1M1Joint | Statistic::DegDistJoint => o.t1 == cell[0] && o.m1 == cell[1],
            Statistic::T1T2Joint => o.t1 == cell[0] && o.t2 == cell[1],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub estimate: f64,
    pub samples: u64,
    /// `sqrt(p̂(1-p̂)/N)`.
    pub se: f64,
    pub seed: u64,
}

impl MCEstimate {
    pub fn from_hits(hits: u64, samples: u64, seed: u64) -> Self {
        let p = hits as f64 / samples as f64;
        MCEstimate {
            estimate: p,
            samples,
            se: (p * (1.0 - p) / samples as f64).sqrt(),
            seed,
        }
    }

    /// `(p̂ - p)/sqrt(p(1-p)/N)`, standardized under the target.
    pub fn z_against(&self, p: f64) -> f64 {
        (self.estimate - p) / (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCCell {
    pub values: Vec<u32>,
    pub estimate: MCEstimate,
    pub target: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCReport {
    pub statistic: &'static str,
    pub source: String,
    pub n_or_limit: String,
    pub samples: u64,
    pub seed: u64,
    pub cells: Vec<MCCell>,
}

impl MCReport {
    pub fn max_abs_z(&self) -> f64 {
        self.cells.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }

    pub fn passes(&self, z_max: f64) -> bool {
        self.max_abs_z() < z_max
    }

    pub fn histogram_rows(&self) -> Vec<HistogramRow> {
        self.cells
            .iter()
            .map(|c| HistogramRow {
                statistic: self.statistic.to_string(),
                value1: c.values[0],
                value2: c.values.get(1).copied(),
                probability: c.estimate.estimate,
                source: self.source.clone(),
                n_or_limit: self.n_or_limit.clone(),
            })
            .collect()
    }
}

/// Per-cell estimates and z-scores from a batch of observations.
pub fn summarize(statistic: Statistic, source: Source, obs: &[LocalObservation], seed: u64) -> MCReport {
    let n = obs.len() as u64;
    let cells = statistic
        .cells()
        .into_iter()
        .map(|(values, target)| {
            let hits = obs.iter().filter(|o| statistic.hit(o, &values)).count() as u64;
            let estimate = MCEstimate::from_hits(hits, n, seed);
            MCCell {
                z: estimate.z_against(target),
                values,
                estimate,
                target,
            }
        })
        .collect();
    MCReport {
        statistic: statistic.name(),
        source: source.to_string(),
        n_or_limit: source.n_or_limit(),
        samples: n,
        seed,
        cells,
    }
}

pub fn mc_limit_check(statistic: Statistic, source: Source, samples: u64, seed: u64, budget: u64) -> Result<MCReport> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let obs = observe_many(source, samples, seed, statistic == Statistic::StaysPositive, budget)?;
    Ok(summarize(statistic, source, &obs, seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of `counts` against the uniform law on its cells.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareResult> {
    if counts.len() < 2 {
        return Err(Error::Domain("need at least two cells".into()));
    }
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let df = counts.len() - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value: dist.sf(statistic),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramRow {
    pub statistic: String,
    pub value1: u32,
    pub value2: Option<u32>,
    pub probability: f64,
    pub source: String,
    pub n_or_limit: String,
}

pub fn write_histogram_csv<W: Write>(mut w: W, rows: &[HistogramRow]) -> Result<()> {
    writeln!(w, "statistic,value1,value2,probability,source,n_or_limit")?;
    for r in rows {
        let v2 = r.value2.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.statistic, r.value1, v2, r.probability, r.source, r.n_or_limit
        )?;
    }
    Ok(())
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationEntry {
    pub identity: String,
    pub n: usize,
    pub passed: bool,
    pub detail: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn small_counts() {
        for (n, c) in [(2, 1), (3, 3), (4, 16), (5, 125), (6, 1296)] {
            assert_eq!(count_factorizations(n).unwrap(), c);
            let all: HashSet<Factorization> = enumerate_factorizations(n).unwrap().collect();
            assert_eq!(all.len() as u64, c);
            assert!(all.iter().all(|f| f.is_minimal()));
        }
        assert!(matches!(enumerate_factorizations(10), Err(Error::EnumerationCap { .. })));
        assert!(enumerate_factorizations(1).is_err());
    }

    #[test]
    fn n3_list() {
        let all: HashSet<Factorization> = enumerate_factorizations(3).unwrap().collect();
        let want: HashSet<Factorization> = [[(1, 2), (1, 3)], [(1, 3), (2, 3)], [(2, 3), (1, 2)]]
            .iter()
            .map(|p| Factorization::plain(3, p).unwrap())
            .collect();
        assert_eq!(all, want);
    }

    #[test]
    fn n3_pgp() {
        let p = exact_joint_pgp(3, StatPair::T1M1).unwrap();
        let third = Ratio::new(1, 3);
        assert_eq!(p.coefficients(), vec![(1, 1, third), (1, 2, third), (2, 1, third)]);
        assert_eq!(p.total_mass(), Ratio::from_integer(1));
        let two = exact_joint_pgp(2, StatPair::T1M1).unwrap();
        assert_eq!(two.coefficients(), vec![(1, 1, Ratio::from_integer(1))]);
    }

    #[test]
    fn conjecture_small() {
        assert_eq!(conjecture_numerators(3)[1][1], 1);
        assert_eq!(conjecture_numerators(3)[2][1], 1);
        assert_eq!(conjecture_numerators(3)[1][2], 1);
        for n in 2..=6 {
            let total: u128 = conjecture_numerators(n).iter().flatten().sum();
            assert_eq!(total, (n as u128).pow(n as u32 - 2));
            assert!(verify_conjecture(n).unwrap().matches);
        }
    }

    #[test]
    fn symmetries_small() {
        assert!(verify_symmetry(3, 1).unwrap().equal);
        assert!(verify_symmetry(2, 1).unwrap().equal);
        assert!(verify_symmetry(5, 2).unwrap().equal);
        assert!(verify_horizontal_symmetry(3, 1).unwrap());
        assert!(verify_horizontal_symmetry(5, 2).unwrap());
        assert!(verify_horizontal_symmetry(5, 3).unwrap());
        assert!(verify_symmetry(4, 5).is_err());
    }

    #[test]
    fn pmf_values() {
        let e = std::f64::consts::E;
        assert!((limit_pmf(LimitLaw::MarginalT(1)).unwrap() - 1.0 / e).abs() < 1e-12);
        assert!((limit_pmf(LimitLaw::JointDegDist(1, 1)).unwrap() - e.powi(-2)).abs() < 1e-12);
        assert!((limit_pmf(LimitLaw::JointTT(1, 1)).unwrap() - e.powi(-2) / 2.0).abs() < 1e-12);
        assert!(limit_pmf(LimitLaw::MarginalT(0)).is_err());
        // the joint law has 1 + Poisson(1) marginals
        for i in 1..6 {
            let row: f64 = (1..60).map(|j| limit_pmf(LimitLaw::JointTT(i, j)).unwrap()).sum();
            assert!((row - limit_pmf(LimitLaw::MarginalT(i)).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_square_sanity() {
        let r = chi_square_uniform(&[100, 100, 100, 100]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert!(chi_square_uniform(&[400, 0, 0, 0]).unwrap().p_value < 1e-10);
    }

    #[test]
    fn observations_are_consistent() {
        for s in 0..30 {
            let o = observe_finite(40, RandomSource::new(8).with_stream(s), true).unwrap();
            assert!(o.t1 >= 1 && o.m1 >= 1 && o.t2 >= 1);
            let k = observe_kesten(RandomSource::new(8).with_stream(s), true, 1_000_000).unwrap();
            assert!(k.t1 >= 1 && k.m1 >= 1);
        }
        // stays_positive agrees with the full relabelling
        for s in 0..200 {
            let rs = RandomSource::new(3).with_stream(s);
            let o = observe_finite(12, rs, true).unwrap();
            let f = crate::random::sample_uniform_factorization(12, &mut rs.rng()).unwrap();
            let x = f.to_tilde().unwrap().trajectory(1).unwrap();
            assert_eq!(o.stays_positive, Some(x.values.iter().all(|&v| v >= 1)));
            let c = f.local_counts();
            assert_eq!((o.t1, o.m1, o.t2), (c.touch(1), c.moves(1), c.touch(2)));
        }
    }

    #[test]
    fn worker_independent() {
        let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let ra = a.install(|| mc_limit_check(Statistic::T1M1Joint, Source::Kesten, 500, 5, 1_000_000).unwrap());
        let rb = b.install(|| mc_limit_check(Statistic::T1M1Joint, Source::Kesten, 500, 5, 1_000_000).unwrap());
        assert_eq!(ra, rb);
    }

    #[test]
    fn spine_reading_matches_labelling() {
        let mut resolved = 0;
        for s in 0..3000 {
            let mut run = LimitRun::new(RandomSource::new(21).with_stream(s), 1_000_000);
            run.extend_find(2).unwrap();
            let spine = spine_stays_positive(run.tree());
            let path = run.walk(1).unwrap().vertices;
            if let Some(direct) = stays_positive(&mut run, &path, Some(1 << 9)).unwrap() {
                assert_eq!(direct, spine, "stream {s}");
                resolved += 1;
            }
        }
        assert!(resolved > 2000, "only {resolved} resolved");
    }
}
