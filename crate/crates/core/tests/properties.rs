use std::collections::BTreeSet;

use proptest::prelude::*;

use minfact::bijections::{dual_bijection, moszkowski_forward, moszkowski_inverse, phi, phi_inverse, tree_of, CayleyTree};
use minfact::labelling::{find_k, full_relabel, ofind_k};
use minfact::random::{sample_pointed_tree, sample_uniform_factorization, RandomSource};
use minfact::tree::{ball, balls_agree, balls_compatible, EdgeMatch, EvTree};
use minfact::Factorization;

fn factorization(max_n: usize) -> impl Strategy<Value = Factorization> {
    (2..=max_n, any::<u64>())
        .prop_map(|(n, seed)| sample_uniform_factorization(n, &mut RandomSource::new(seed).rng()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn json_round_trip(f in factorization(40)) {
        let back = Factorization::from_json(&f.to_json()).unwrap();
        prop_assert!(back.is_minimal());
        prop_assert_eq!(&back, &f);
        let t = f.to_tilde().unwrap();
        prop_assert_eq!(Factorization::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn tilde_round_trip(f in factorization(40)) {
        let t = f.to_tilde().unwrap();
        prop_assert!(t.is_minimal());
        prop_assert_eq!(t.min_label(), -((f.n() as i64 - 1) / 2));
        prop_assert_eq!(t.max_label(), f.n() as i64 / 2);
        prop_assert_eq!(t.to_plain().unwrap(), f);
    }

    #[test]
    fn touches_and_moves_sum_to_twice_the_edges(f in factorization(40)) {
        let c = f.local_counts();
        let n = f.n() as u32;
        prop_assert_eq!(c.touch.iter().sum::<u32>(), 2 * (n - 1));
        prop_assert_eq!(c.moves.iter().sum::<u32>(), 2 * (n - 1));
        prop_assert!(c.touch.iter().chain(&c.moves).all(|&x| x >= 1));
    }

    #[test]
    fn trajectories_run_from_i_to_its_successor(f in factorization(30)) {
        for g in [f.clone(), f.to_tilde().unwrap()] {
            for x in g.trajectories() {
                let i = x.start();
                prop_assert_eq!(x.last(), g.alphabet().successor(g.n(), i));
                prop_assert_eq!(x.jumps() as u32, g.local_counts().moves(i));
                prop_assert!(x.jump_times().windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn tree_encoding_round_trip(f in factorization(60)) {
        let e = moszkowski_forward(&f).unwrap();
        prop_assert_eq!(e.degree(e.point()) as u32, f.local_counts().touch(1));
        prop_assert_eq!(&moszkowski_inverse(&e).unwrap(), &f);
        let c = phi(&e).unwrap();
        prop_assert_eq!(CayleyTree::from_prufer(c.n(), &c.to_prufer()).unwrap(), c.clone());
        prop_assert_eq!(moszkowski_inverse(&phi_inverse(&c)).unwrap(), f);
    }

    #[test]
    fn relabelling_depends_only_on_label_order(f in factorization(40), a in 0.1f64..5.0, b in -3.0f64..3.0) {
        let e = moszkowski_forward(&f).unwrap();
        let warped = e.map_labels(|l| (l as f64).powf(1.0 + a) + b).unwrap();
        let n = f.n();
        for k in [1, n / 2, n] {
            let (x, _) = find_k(&EvTree::unlabelled(e.clone()), k).unwrap();
            let (y, _) = find_k(&EvTree::unlabelled(warped.clone()), k).unwrap();
            prop_assert_eq!(x.vlabels(), y.vlabels());
        }
        let (x, y) = (full_relabel(&e).unwrap(), full_relabel(&warped).unwrap());
        prop_assert_eq!(x.vlabels(), y.vlabels());
    }

    #[test]
    fn find_and_ofind_split_the_labels(f in factorization(30), split in 0.0f64..1.0) {
        let n = f.n();
        let k = 1 + ((n - 1) as f64 * split) as usize;
        let t = EvTree::unlabelled(moszkowski_forward(&f).unwrap());
        let (a, _) = find_k(&t, k).unwrap();
        let done = if k < n { ofind_k(&a, n - k - 1).unwrap().0 } else { a };
        let labels: BTreeSet<i64> = done.vlabels().iter().map(|l| l.unwrap()).collect();
        prop_assert_eq!(labels, (k as i64 + 1 - n as i64..=k as i64).collect::<BTreeSet<_>>());
    }

    #[test]
    fn dual_bijection_swaps_touches_and_moves(f in factorization(30)) {
        let b = dual_bijection(&f).unwrap();
        prop_assert!(b.is_minimal());
        let (cf, cb) = (f.local_counts(), b.local_counts());
        let n = f.n() as i64;
        for i in 1..=n {
            prop_assert_eq!(cf.moves(i), cb.touch(i));
            prop_assert_eq!(cf.touch(i), cb.moves(if i == 1 { n } else { i - 1 }));
        }
    }

    #[test]
    fn balls_nest(f in factorization(40), h1 in 0usize..4, extra in 0usize..4) {
        let t = full_relabel(&moszkowski_forward(&f).unwrap()).unwrap();
        let h2 = h1 + extra;
        let small = ball(&t, h1);
        let inner = ball(&ball(&t, h2).tree, h1);
        prop_assert!(balls_agree(&small, &inner, EdgeMatch::Exact));
        prop_assert!(small.tree.tree.len() <= ball(&t, h2).tree.tree.len());
        let rescaled = t.tree.map_labels(|l| l as f64 / f.n() as f64).unwrap();
        let rescaled = EvTree::new(rescaled, t.vlabels().to_vec()).unwrap();
        prop_assert!(balls_compatible(&small, &ball(&rescaled, h1)));
        for v in small.tree.tree.edges() {
            prop_assert_eq!(t.tree.distance(small.origin[v.u], small.origin[v.v]), 1);
        }
    }

    #[test]
    fn tree_of_matches_full_relabel_of_the_recentred(f in factorization(40)) {
        let direct = tree_of(&f.to_tilde().unwrap()).unwrap();
        let relabelled = full_relabel(&moszkowski_forward(&f).unwrap()).unwrap();
        let mut a: Vec<(i64, i64, u32)> = direct.tree.edges().iter()
            .map(|e| { let (x, y) = (direct.label_of(e.u).unwrap(), direct.label_of(e.v).unwrap()); (x.min(y), x.max(y), e.label) })
            .collect();
        let mut b: Vec<(i64, i64, u32)> = relabelled.tree.edges().iter()
            .map(|e| { let (x, y) = (relabelled.label_of(e.u).unwrap(), relabelled.label_of(e.v).unwrap()); (x.min(y), x.max(y), e.label) })
            .collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sampled_pointed_trees_have_sorted_adjacency(n in 1usize..200, seed in any::<u64>()) {
        let t = sample_pointed_tree(n, &mut RandomSource::new(seed).rng()).unwrap();
        prop_assert_eq!(t.len(), n);
        for v in 0..n {
            let labels: Vec<u32> = t.neighbours(v).iter().map(|p| p.0).collect();
            prop_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
