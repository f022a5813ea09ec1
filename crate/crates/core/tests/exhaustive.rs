use std::collections::{HashMap, HashSet};

use num_rational::Ratio;

use minfact::stats::{
    conjecture_numerators, count_factorizations, enumerate_factorizations, exact_joint_pgp, limit_pmf,
    verify_symmetry, LimitLaw, StatPair,
};
use minfact::Factorization;

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn multinomial(m: u32, a: u32, b: u32) -> u128 {
    let f = |k: u32| (1..=k as u128).product::<u128>();
    f(m) / (f(a) * f(b) * f(m - a - b))
}

/// `(#T₁, #M₁)` straight from the definitions: transpositions containing 1,
/// and moves of the point that starts at 1.
fn t1_m1_by_hand(f: &Factorization) -> (usize, usize) {
    let t1 = f.taus().iter().filter(|t| t.contains(1)).count();
    let mut x = 1;
    let mut m1 = 0;
    for t in f.taus() {
        if t.contains(x) {
            x = t.apply(x);
            m1 += 1;
        }
    }
    (t1, m1)
}

#[test]
fn counts_are_n_to_the_n_minus_2() {
    let cayley = [1u64, 3, 16, 125, 1296, 16807, 262144];
    for (n, &want) in (2..=8).zip(&cayley) {
        let all: Vec<Factorization> = enumerate_factorizations(n).unwrap().collect();
        assert_eq!(all.len() as u64, want);
        assert_eq!(count_factorizations(n).unwrap(), want);
        let distinct: HashSet<&Factorization> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
        assert!(all.iter().all(Factorization::is_minimal));
    }
}

#[test]
fn enumeration_respects_the_cap() {
    let e = enumerate_factorizations(10).err().unwrap();
    assert!(e.is_resource());
}

#[test]
fn conjecture_numerators_match_the_trinomial_expansion() {
    for n in 2..=12usize {
        let m = (n - 2) as u32;
        let c = conjecture_numerators(n);
        let mut total = 0u128;
        for a in 0..=m {
            for b in 0..=m - a {
                let want = multinomial(m, a, b) * (n as u128 - 2).pow(m - a - b);
                assert_eq!(c[a as usize + 1][b as usize + 1], want, "n = {n}, x^{} y^{}", a + 1, b + 1);
                total += want;
            }
        }
        assert_eq!(total, (n as u128).pow(m));
    }
}

#[test]
fn exact_pgp_agrees_with_direct_tally() {
    for n in 2..=7 {
        let pgp = exact_joint_pgp(n, StatPair::T1M1).unwrap();
        let mut tally: HashMap<(usize, usize), u64> = HashMap::new();
        for f in enumerate_factorizations(n).unwrap() {
            *tally.entry(t1_m1_by_hand(&f)).or_default() += 1;
        }
        let total = count_factorizations(n).unwrap();
        for (&(a, b), &c) in &tally {
            assert_eq!(pgp.prob(a, b), Ratio::new(c, total), "n = {n}, ({a}, {b})");
        }
        assert_eq!(pgp.total_mass(), Ratio::from_integer(1));
        let marginal: Ratio<u64> = (0..=n).map(|a| pgp.marginal_x(a)).sum();
        assert_eq!(marginal, Ratio::from_integer(1));
    }
}

#[test]
fn conjecture_holds_through_n_7() {
    for n in 2..=7 {
        let pgp = exact_joint_pgp(n, StatPair::T1M1).unwrap();
        let c = conjecture_numerators(n);
        let total = (n as u128).pow(n as u32 - 2);
        for a in 0..=n {
            for b in 0..=n {
                let p = pgp.prob(a, b);
                assert_eq!(*p.numer() as u128 * total, c[a][b] * *p.denom() as u128, "n = {n}, ({a}, {b})");
            }
        }
    }
}

#[test]
fn touches_and_moves_are_equidistributed() {
    for n in 2..=8usize {
        let mut t: Vec<HashMap<u32, u64>> = vec![HashMap::new(); n + 1];
        let mut m: Vec<HashMap<u32, u64>> = vec![HashMap::new(); n + 1];
        for f in enumerate_factorizations(n).unwrap() {
            let c = f.local_counts();
            for i in 1..=n {
                *t[i].entry(c.touch(i as i64)).or_default() += 1;
                *m[i].entry(c.moves(i as i64)).or_default() += 1;
            }
        }
        for i in 1..=n {
            assert_eq!(t[i], m[i], "n = {n}, i = {i}");
        }
        if n <= 6 {
            for k in 1..=n.min(3) {
                assert!(verify_symmetry(n, k).unwrap().equal);
            }
        }
    }
}

#[test]
fn limit_laws_are_normalised() {
    let e = (-1.0f64).exp();
    for j in 1..=8 {
        let p = limit_pmf(LimitLaw::MarginalT(j)).unwrap();
        assert!((p - e / factorial(j - 1)).abs() < 1e-15);
    }
    assert!((limit_pmf(LimitLaw::MarginalT(2)).unwrap() - 0.36787944117144233).abs() < 1e-15);
    assert!((limit_pmf(LimitLaw::JointDegDist(2, 3)).unwrap() - 0.06766764161830635).abs() < 1e-15);
    assert!((limit_pmf(LimitLaw::StaysPositive).unwrap() - 0.6321205588285577).abs() < 1e-15);

    let mut mass = 0.0;
    for i in 1..=30 {
        let row: f64 = (1..=30).map(|j| limit_pmf(LimitLaw::JointTT(i, j)).unwrap()).sum();
        assert!((row - e / factorial(i - 1)).abs() < 1e-12, "row {i}: {row}");
        mass += row;
    }
    assert!((mass - 1.0).abs() < 1e-12);
    for i in 1..=6 {
        for j in 1..=6 {
            let a = limit_pmf(LimitLaw::JointTT(i, j)).unwrap();
            assert!(a > 0.0);
            assert!((a - limit_pmf(LimitLaw::JointTT(j, i)).unwrap()).abs() < 1e-15);
        }
    }
    assert!(limit_pmf(LimitLaw::MarginalT(0)).is_err());
}
