use minfact::bijections::{moszkowski_forward, moszkowski_inverse, phi, tree_of};
use minfact::labelling::full_relabel;
use minfact::tree::{ball, balls_agree, EdgeMatch};
use minfact::random::{sample_uniform_factorization, RandomSource};
use minfact::Result;

fn main() -> Result<()> {
    let f = sample_uniform_factorization(9, &mut RandomSource::new(5).rng())?;
    println!("F = {}", f.to_json());
    let labelled = tree_of(&f)?;
    let e = moszkowski_forward(&f)?;
    println!("{}", labelled.to_dot("tree_of_f"));

    let cayley = phi(&e)?;
    println!("Cayley edges {:?}, Prufer {:?}", cayley.edges(), cayley.to_prufer());
    assert_eq!(moszkowski_inverse(&e)?, f);

    let centred = full_relabel(&e)?;
    for h in 0..3 {
        let b = ball(&centred, h);
        println!("ball of radius {h}: {} vertices", b.tree.tree.len());
        assert!(balls_agree(&b, &ball(&ball(&centred, 3).tree, h), EdgeMatch::Exact));
    }
    Ok(())
}
