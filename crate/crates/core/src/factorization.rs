//! Transposition sequences, minimal factorizations of the full cycle and the
//! statistics read off them: partial products, trajectories, and the touch and
//! move index sets.
//!
//! Products are taken left to right: `τ₁τ₂⋯τ_k` first applies `τ₁`, then `τ₂`,
//! and so on.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unordered pair of distinct labels, stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transposition {
    a: i64,
    b: i64,
}

impl Transposition {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Transposition { a, b }),
            std::cmp::Ordering::Greater => Ok(Transposition { a: b, b: a }),
            std::cmp::Ordering::Equal => Err(Error::Malformed(format!(
                "transposition ({a},{b}) has equal endpoints"
            ))),
        }
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn contains(&self, x: i64) -> bool {
        self.a == x || self.b == x
    }

    #[inline]
    pub fn apply(&self, x: i64) -> i64 {
        if x == self.a {
            self.b
        } else if x == self.b {
            self.a
        } else {
            x
        }
    }

    fn map(&self, f: impl Fn(i64) -> i64) -> Self {
        Transposition::new(f(self.a), f(self.b)).expect("relabelling is injective")
    }
}

impl fmt::Display for Transposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Which label set a factorization lives on.
///
/// `Plain` uses `{1..n}`; `Tilde` uses the recentered set
/// `{-⌊(n-1)/2⌋, .., ⌊n/2⌋}`. In both cases the target cycle sends every label
/// to its successor and the largest label back to the smallest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Alphabet {
    Plain,
    Tilde,
}

impl Alphabet {
    pub fn min_label(self, n: usize) -> i64 {
        match self {
            Alphabet::Plain => 1,
            Alphabet::Tilde => -(((n as i64) - 1) / 2),
        }
    }

    pub fn max_label(self, n: usize) -> i64 {
        match self {
            Alphabet::Plain => n as i64,
            Alphabet::Tilde => (n as i64) / 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Alphabet::Plain => "plain",
            Alphabet::Tilde => "tilde",
        }
    }

    /// Image of `x` under the full cycle on this label set.
    pub fn successor(self, n: usize, x: i64) -> i64 {
        if x == self.max_label(n) {
            self.min_label(n)
        } else {
            x + 1
        }
    }
}

/// Recentering of a single plain label: `a ↦ a` if `a ≤ n/2`, else `a − n`.
pub fn tilde_label(n: usize, a: i64) -> i64 {
    if 2 * a <= n as i64 {
        a
    } else {
        a - n as i64
    }
}

/// Inverse of [`tilde_label`].
pub fn plain_label(n: usize, a: i64) -> i64 {
    if a <= 0 {
        a + n as i64
    } else {
        a
    }
}

/// A total mapping on a contiguous label range, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    offset: i64,
    images: Vec<i64>,
}

impl Permutation {
    pub fn identity(min: i64, max: i64) -> Self {
        Permutation {
            offset: min,
            images: (min..=max).collect(),
        }
    }

    #[inline]
    pub fn apply(&self, x: i64) -> i64 {
        self.images[(x - self.offset) as usize]
    }

    pub fn domain(&self) -> std::ops::RangeInclusive<i64> {
        self.offset..=self.offset + self.images.len() as i64 - 1
    }

    /// True when this is the cycle `(min, min+1, .., max)`.
    pub fn is_successor_cycle(&self) -> bool {
        let max = self.offset + self.images.len() as i64 - 1;
        self.domain()
            .all(|x| self.apply(x) == if x == max { self.offset } else { x + 1 })
    }
}

/// Piecewise-constant integer function stored by its breakpoints.
///
/// `values[j]` holds on `[breaks[j], breaks[j+1])`; the last value holds up to
/// and including `end`. `breaks[0]` is the time origin and `values[0]` the
/// starting point; every later breakpoint is a genuine jump.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrajectory<T> {
    pub breaks: Vec<T>,
    pub values: Vec<i64>,
    pub end: T,
}

impl<T: Copy + PartialOrd> StepTrajectory<T> {
    pub fn start(&self) -> i64 {
        self.values[0]
    }

    pub fn last(&self) -> i64 {
        *self.values.last().expect("trajectory is never empty")
    }

    pub fn jumps(&self) -> usize {
        self.values.len() - 1
    }

    /// Jump times, without the time origin.
    pub fn jump_times(&self) -> &[T] {
        &self.breaks[1..]
    }

    pub fn value_at(&self, t: T) -> i64 {
        let idx = self.breaks.partition_point(|&b| b <= t);
        self.values[idx.saturating_sub(1)]
    }

    pub fn min_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).min().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexKind {
    Touch,
    Move,
}

/// Positions (1-based) of the transpositions touching or moving one label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    pub kind: IndexKind,
    pub i: i64,
    pub indices: Vec<usize>,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Per-label counts `#T_i` and `#M_i`, indexed from the smallest label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCounts {
    pub offset: i64,
    pub touch: Vec<u32>,
    pub moves: Vec<u32>,
}

impl LocalCounts {
    pub fn touch(&self, i: i64) -> u32 {
        self.touch[(i - self.offset) as usize]
    }

    pub fn moves(&self, i: i64) -> u32 {
        self.moves[(i - self.offset) as usize]
    }
}

/// A sequence of `n − 1` transpositions on a declared label set.
///
/// Construction checks the structure (length and label range); whether the
/// product is the full cycle is a separate question answered by
/// [`Factorization::is_minimal`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FactorizationRecord", into = "FactorizationRecord")]
pub struct Factorization {
    n: usize,
    alphabet: Alphabet,
    taus: Vec<Transposition>,
}

impl Factorization {
    pub fn new(n: usize, alphabet: Alphabet, taus: Vec<Transposition>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Malformed(format!("size n = {n} must be at least 2")));
        }
        if taus.len() != n - 1 {
            return Err(Error::Malformed(format!(
                "expected {} transpositions for n = {n}, got {}",
                n - 1,
                taus.len()
            )));
        }
        let (lo, hi) = (alphabet.min_label(n), alphabet.max_label(n));
        for t in &taus {
            if t.a < lo || t.b > hi {
                return Err(Error::Malformed(format!(
                    "transposition {t} leaves the {} label set {lo}..={hi}",
                    alphabet.name()
                )));
            }
        }
        Ok(Factorization { n, alphabet, taus })
    }

    pub fn from_pairs(n: usize, alphabet: Alphabet, pairs: &[(i64, i64)]) -> Result<Self> {
        let taus = pairs
            .iter()
            .map(|&(a, b)| Transposition::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Factorization::new(n, alphabet, taus)
    }

    pub fn plain(n: usize, pairs: &[(i64, i64)]) -> Result<Self> {
        Factorization::from_pairs(n, Alphabet::Plain, pairs)
    }

    pub fn tilde(n: usize, pairs: &[(i64, i64)]) -> Result<Self> {
        Factorization::from_pairs(n, Alphabet::Tilde, pairs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn is_tilde(&self) -> bool {
        self.alphabet == Alphabet::Tilde
    }

    pub fn taus(&self) -> &[Transposition] {
        &self.taus
    }

    pub fn min_label(&self) -> i64 {
        self.alphabet.min_label(self.n)
    }

    pub fn max_label(&self) -> i64 {
        self.alphabet.max_label(self.n)
    }

    pub fn labels(&self) -> std::ops::RangeInclusive<i64> {
        self.min_label()..=self.max_label()
    }

    fn check_label(&self, i: i64) -> Result<()> {
        if self.labels().contains(&i) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "label {i} is outside the {} label set {}..={}",
                self.alphabet.name(),
                self.min_label(),
                self.max_label()
            )))
        }
    }

    fn require(&self, alphabet: Alphabet) -> Result<()> {
        if self.alphabet == alphabet {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                expected: alphabet.name(),
                found: self.alphabet.name(),
            })
        }
    }

    /// Left-to-right product of the first `k` transpositions.
    pub fn partial_product(&self, k: usize) -> Result<Permutation> {
        if k > self.taus.len() {
            return Err(Error::range("k", k as i64, 0, self.taus.len() as i64));
        }
        let (lo, hi) = (self.min_label(), self.max_label());
        // Track the preimage of every position; each transposition then costs O(1).
        let mut who: Vec<i64> = (lo..=hi).collect();
        for t in &self.taus[..k] {
            who.swap((t.a - lo) as usize, (t.b - lo) as usize);
        }
        let mut images = vec![0; who.len()];
        for (pos, &x) in who.iter().enumerate() {
            images[(x - lo) as usize] = pos as i64 + lo;
        }
        Ok(Permutation { offset: lo, images })
    }

    /// Whether the full product is the cycle of the declared label set.
    pub fn is_minimal(&self) -> bool {
        self.partial_product(self.taus.len())
            .map(|p| p.is_successor_cycle())
            .unwrap_or(false)
    }

    pub fn ensure_minimal(&self) -> Result<()> {
        if self.is_minimal() {
            Ok(())
        } else {
            Err(Error::NotMinimal)
        }
    }

    pub fn to_tilde(&self) -> Result<Factorization> {
        self.require(Alphabet::Plain)?;
        let n = self.n;
        Ok(Factorization {
            n,
            alphabet: Alphabet::Tilde,
            taus: self.taus.iter().map(|t| t.map(|a| tilde_label(n, a))).collect(),
        })
    }

    pub fn to_plain(&self) -> Result<Factorization> {
        self.require(Alphabet::Tilde)?;
        let n = self.n;
        Ok(Factorization {
            n,
            alphabet: Alphabet::Plain,
            taus: self.taus.iter().map(|t| t.map(|a| plain_label(n, a))).collect(),
        })
    }

    /// Trajectory of `i`: `X_i(k)` is the image of `i` under the first `k`
    /// transpositions, with `X_i(n) = X_i(n − 1)`.
    pub fn trajectory(&self, i: i64) -> Result<StepTrajectory<usize>> {
        self.check_label(i)?;
        let mut breaks = vec![0];
        let mut values = vec![i];
        let mut cur = i;
        for (k, t) in self.taus.iter().enumerate() {
            let next = t.apply(cur);
            if next != cur {
                breaks.push(k + 1);
                values.push(next);
                cur = next;
            }
        }
        Ok(StepTrajectory {
            breaks,
            values,
            end: self.n,
        })
    }

    /// All trajectories in one sweep, ordered by starting label.
    pub fn trajectories(&self) -> Vec<StepTrajectory<usize>> {
        let lo = self.min_label();
        let size = self.n;
        let mut out: Vec<StepTrajectory<usize>> = self
            .labels()
            .map(|i| StepTrajectory {
                breaks: vec![0],
                values: vec![i],
                end: size,
            })
            .collect();
        // who[v - lo] = the label whose trajectory currently sits at v
        let mut who: Vec<usize> = (0..size).collect();
        for (k, t) in self.taus.iter().enumerate() {
            let (pa, pb) = ((t.a - lo) as usize, (t.b - lo) as usize);
            let (xa, xb) = (who[pa], who[pb]);
            out[xa].breaks.push(k + 1);
            out[xa].values.push(t.b);
            out[xb].breaks.push(k + 1);
            out[xb].values.push(t.a);
            who.swap(pa, pb);
        }
        out
    }

    pub fn touch_set(&self, i: i64) -> Result<IndexSet> {
        self.check_label(i)?;
        Ok(IndexSet {
            kind: IndexKind::Touch,
            i,
            indices: self
                .taus
                .iter()
                .enumerate()
                .filter(|(_, t)| t.contains(i))
                .map(|(k, _)| k + 1)
                .collect(),
        })
    }

    pub fn move_set(&self, i: i64) -> Result<IndexSet> {
        let traj = self.trajectory(i)?;
        Ok(IndexSet {
            kind: IndexKind::Move,
            i,
            indices: traj.jump_times().to_vec(),
        })
    }

    /// `#T_i` and `#M_i` for every label, in one pass.
    pub fn local_counts(&self) -> LocalCounts {
        let lo = self.min_label();
        let mut touch = vec![0u32; self.n];
        let mut moves = vec![0u32; self.n];
        let mut who: Vec<usize> = (0..self.n).collect();
        for t in &self.taus {
            let (pa, pb) = ((t.a - lo) as usize, (t.b - lo) as usize);
            touch[pa] += 1;
            touch[pb] += 1;
            moves[who[pa]] += 1;
            moves[who[pb]] += 1;
            who.swap(pa, pb);
        }
        LocalCounts {
            offset: lo,
            touch,
            moves,
        }
    }

    /// Labels whose trajectory enters `[-A, A]` at some time `0 ≤ k ≤ n − 1`.
    pub fn entering_indices(&self, a: i64) -> Result<Vec<i64>> {
        self.require(Alphabet::Tilde)?;
        let half = (self.n / 2) as i64;
        if a < 1 || a > half.max(1) {
            return Err(Error::range("A", a, 1, half.max(1)));
        }
        Ok(self
            .trajectories()
            .into_iter()
            .filter(|t| t.min_abs() <= a)
            .map(|t| t.start())
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("factorization serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, t) in self.taus.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// On-disk form: `{"n": 10, "tilde": false, "taus": [[8,9],[5,6],...]}`.
#[derive(Serialize, Deserialize)]
struct FactorizationRecord {
    n: usize,
    tilde: bool,
    taus: Vec<[i64; 2]>,
}

impl From<Factorization> for FactorizationRecord {
    fn from(f: Factorization) -> Self {
        FactorizationRecord {
            n: f.n,
            tilde: f.is_tilde(),
            taus: f.taus.iter().map(|t| [t.a, t.b]).collect(),
        }
    }
}

impl TryFrom<FactorizationRecord> for Factorization {
    type Error = Error;

    fn try_from(r: FactorizationRecord) -> Result<Self> {
        let alphabet = if r.tilde {
            Alphabet::Tilde
        } else {
            Alphabet::Plain
        };
        let pairs: Vec<(i64, i64)> = r.taus.iter().map(|p| (p[0], p[1])).collect();
        Factorization::from_pairs(r.n, alphabet, &pairs)
    }
}

/// Breakpoints-only CSV with header `i,k,value`.
pub fn write_trajectories_csv<W: Write>(
    mut w: W,
    trajectories: &[StepTrajectory<usize>],
) -> std::io::Result<()> {
    writeln!(w, "i,k,value")?;
    for t in trajectories {
        for (k, v) in t.breaks.iter().zip(&t.values) {
            writeln!(w, "{},{},{}", t.start(), k, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example_plain() -> Factorization {
        Factorization::plain(
            10,
            &[(8, 9), (5, 6), (1, 5), (2, 3), (1, 8), (2, 5), (7, 8), (4, 5), (1, 10)],
        )
        .unwrap()
    }

    fn example_tilde() -> Factorization {
        Factorization::tilde(
            10,
            &[(-1, -2), (5, -4), (1, 5), (2, 3), (1, -2), (2, 5), (-3, -2), (4, 5), (1, 0)],
        )
        .unwrap()
    }

    #[test]
    fn partial_product_small() {
        let f = Factorization::plain(3, &[(1, 2), (1, 3)]).unwrap();
        let p = f.partial_product(2).unwrap();
        assert_eq!((p.apply(1), p.apply(2), p.apply(3)), (2, 3, 1));
        assert_eq!(f.partial_product(0).unwrap(), Permutation::identity(1, 3));
        assert!(matches!(f.partial_product(3), Err(Error::Range { .. })));
    }

    #[test]
    fn example_plain_is_full_cycle() {
        let p = example_plain().partial_product(9).unwrap();
        assert!(p.is_successor_cycle());
        assert!(example_plain().is_minimal());
    }

    #[test]
    fn minimality_checks() {
        assert!(Factorization::plain(3, &[(1, 2), (1, 3)]).unwrap().is_minimal());
        let bad = Factorization::plain(3, &[(1, 3), (1, 2)]).unwrap();
        assert!(!bad.is_minimal());
        let p = bad.partial_product(2).unwrap();
        // (1,3,2)
        assert_eq!((p.apply(1), p.apply(3), p.apply(2)), (3, 2, 1));
        assert!(example_tilde().is_minimal());
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(Transposition::new(2, 2).is_err());
        assert!(Factorization::plain(3, &[(1, 2)]).is_err());
        assert!(Factorization::plain(3, &[(1, 2), (1, 4)]).is_err());
        assert!(Factorization::tilde(3, &[(1, 2), (0, 1)]).is_err());
        assert!(Factorization::plain(1, &[]).is_err());
    }

    #[test]
    fn tilde_recentering() {
        assert_eq!(example_plain().to_tilde().unwrap(), example_tilde());
        let f = Factorization::plain(3, &[(1, 2), (1, 3)]).unwrap();
        assert_eq!(
            f.to_tilde().unwrap(),
            Factorization::tilde(3, &[(1, -1), (1, 0)]).unwrap()
        );
        let f = Factorization::plain(2, &[(1, 2)]).unwrap();
        assert_eq!(f.to_tilde().unwrap(), Factorization::tilde(2, &[(1, 0)]).unwrap());
        assert_eq!(example_tilde().to_plain().unwrap(), example_plain());
        assert!(matches!(example_tilde().to_tilde(), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn trajectory_examples() {
        let f = Factorization::tilde(3, &[(1, -1), (1, 0)]).unwrap();
        let t = f.trajectory(1).unwrap();
        assert_eq!(t.values, vec![1, -1]);
        assert_eq!(t.breaks, vec![0, 1]);
        assert_eq!(t.value_at(3), -1);

        let t = example_tilde().trajectory(1).unwrap();
        assert_eq!(t.jump_times(), &[3, 6]);
        assert_eq!(t.last(), 2);
        assert!(example_tilde().trajectory(6).is_err());
    }

    #[test]
    fn constant_trajectory_when_untouched() {
        // raw sequence, not a minimal factorization
        let f = Factorization::plain(4, &[(1, 2), (1, 2), (1, 2)]).unwrap();
        let t = f.trajectory(4).unwrap();
        assert_eq!(t.values, vec![4]);
        assert!(f.touch_set(4).unwrap().is_empty());
        assert!(f.move_set(4).unwrap().is_empty());
    }

    #[test]
    fn touch_and_move_sets_example() {
        assert_eq!(example_plain().touch_set(1).unwrap().indices, vec![3, 5, 9]);
        assert_eq!(example_plain().move_set(1).unwrap().indices, vec![3, 6]);
    }

    #[test]
    fn entering_indices_examples() {
        let f = Factorization::tilde(3, &[(1, -1), (1, 0)]).unwrap();
        assert_eq!(f.entering_indices(1).unwrap(), vec![-1, 0, 1]);
        let all: Vec<i64> = example_tilde().labels().collect();
        assert_eq!(example_tilde().entering_indices(5).unwrap(), all);
        assert!(example_tilde().entering_indices(0).is_err());
        assert!(example_tilde().entering_indices(6).is_err());
        assert!(example_plain().entering_indices(1).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let f = example_tilde();
        let batch = f.trajectories();
        for (t, i) in batch.iter().zip(f.labels()) {
            assert_eq!(*t, f.trajectory(i).unwrap());
        }
        let counts = f.local_counts();
        for i in f.labels() {
            assert_eq!(counts.touch(i) as usize, f.touch_set(i).unwrap().len());
            assert_eq!(counts.moves(i) as usize, f.move_set(i).unwrap().len());
        }
    }

    #[test]
    fn json_round_trip_and_csv() {
        let f = example_plain();
        let s = f.to_json();
        assert!(s.starts_with(r#"{"n":10,"tilde":false,"taus":[[8,9],[5,6]"#));
        assert_eq!(Factorization::from_json(&s).unwrap(), f);
        assert!(Factorization::from_json(r#"{"n":3,"tilde":false,"taus":[[1,1],[1,2]]}"#).is_err());

        let mut buf = Vec::new();
        write_trajectories_csv(&mut buf, &[example_tilde().trajectory(1).unwrap()]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,k,value\n1,0,1\n1,3,5\n1,6,2\n");
    }
}
