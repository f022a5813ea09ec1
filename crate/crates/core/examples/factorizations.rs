//! Building a minimal factorization, checking it, and reading off the
//! trajectories and the touch/move statistics.

use minfact::{Factorization, Result};

fn main() -> Result<()> {
    let f = Factorization::plain(
        10,
        &[(8, 9), (5, 6), (1, 5), (2, 3), (1, 8), (2, 5), (7, 8), (4, 5), (1, 10)],
    )?;
    println!("F = {}", f.to_json());
    println!("minimal: {}", f.is_minimal());

    let counts = f.local_counts();
    for i in f.labels() {
        let x = f.trajectory(i)?;
        println!(
            "i = {i:>2}  #T = {}  #M = {}  path {:?}",
            counts.touch(i),
            counts.moves(i),
            x.values
        );
    }

    // Same factorization on the centred alphabet -4..=5.
    let t = f.to_tilde()?;
    println!("tilde F = {}", t.to_json());
    println!("I_2 = {:?}", t.entering_indices(2)?);

    let swapped = Factorization::plain(3, &[(1, 3), (1, 2)])?;
    println!("(1 3)(1 2) minimal: {}", swapped.is_minimal());
    Ok(())
}
