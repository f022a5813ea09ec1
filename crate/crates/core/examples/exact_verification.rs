use minfact::stats::{
    exact_joint_pgp, verify_conjecture, verify_horizontal_symmetry, verify_symmetry, StatPair,
};
use minfact::Result;

fn main() -> Result<()> {
    for n in 2..=7 {
        println!("n = {n}: {}", verify_conjecture(n)?);
    }

    let pgp = exact_joint_pgp(5, StatPair::T1M1)?;
    for (a, b, p) in pgp.coefficients() {
        println!("P(#T1 = {a}, #M1 = {b}) = {p}");
    }

    for n in 2..=6 {
        for k in 1..=n.min(3) {
            let r = verify_symmetry(n, k)?;
            println!("n = {n}, k = {k}: laws equal = {}, supports {:?}", r.equal, r.support);
        }
        let mirrored = (1..=n).all(|j| verify_horizontal_symmetry(n, j).unwrap_or(false));
        println!("n = {n}: (T1, Mj) ~ (T1, M(n+1-j)) for all j: {mirrored}");
    }
    Ok(())
}
