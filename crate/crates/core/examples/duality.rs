use minfact::bijections::{compute_faces, dual_dot, gy_dual};
use minfact::{Factorization, Result};

fn main() -> Result<()> {
    let f = Factorization::plain(
        10,
        &[(8, 9), (5, 6), (1, 5), (2, 3), (1, 8), (2, 5), (7, 8), (4, 5), (1, 10)],
    )?;
    let emb = compute_faces(&f)?;
    for face in emb.faces() {
        println!("face at arc ({}, {}): edges {:?}", face.arc, face.arc % 10 + 1, face.edges);
    }

    let (dual, sym, b) = gy_dual(&f)?;
    println!("dual edges (a, b, label): {:?}", dual.edge_table());
    println!("symmetrized:              {:?}", sym.edge_table());
    println!("B(F) = {}", b.to_json());

    let (cf, cb) = (f.local_counts(), b.local_counts());
    for i in 1..=10 {
        let prev = if i == 1 { 10 } else { i - 1 };
        println!("i = {i:>2}: #M_i(F) = {} = #T_i(B) = {};  #T_i(F) = {} = #M_(i-1)(B) = {}",
            cf.moves(i), cb.touch(i), cf.touch(i), cb.moves(prev));
    }
    println!("{}", dual_dot(&f)?);
    Ok(())
}
