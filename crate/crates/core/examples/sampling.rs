//! Uniform sampling through Prufer sequences, checked against the exact
//! uniform law at n = 4.

use std::collections::HashMap;

use minfact::random::{sample_pointed_tree, sample_uniform_factorization, RandomSource};
use minfact::stats::{chi_square_uniform, enumerate_factorizations};
use minfact::Result;

fn main() -> Result<()> {
    let source = RandomSource::new(42);
    let mut rng = source.rng();
    let f = sample_uniform_factorization(12, &mut rng)?;
    println!("uniform F in M_12: {}", f.to_json());

    let t = sample_pointed_tree(100_000, &mut rng)?;
    println!("pointed tree on 10^5 vertices, root degree {}, height {}", t.degree(t.point()), t.height());

    let index: HashMap<_, _> = enumerate_factorizations(4)?.enumerate().map(|(i, f)| (f, i)).collect();
    let mut counts = vec![0u64; index.len()];
    for _ in 0..16_000 {
        counts[index[&sample_uniform_factorization(4, &mut rng)?]] += 1;
    }
    let chi = chi_square_uniform(&counts)?;
    println!("n = 4 counts {counts:?}");
    println!("chi2 = {:.2} on {} dof, p = {:.3}", chi.statistic, chi.df, chi.p_value);

    // Replica streams: the same (seed, stream) always gives the same draw.
    let a = sample_uniform_factorization(8, &mut source.with_stream(3).rng())?;
    let b = sample_uniform_factorization(8, &mut source.with_stream(3).rng())?;
    assert_eq!(a, b);
    Ok(())
}
