//! Labelling Kesten's tree with uniform edge labels and reading the limit
//! trajectories.

use minfact::random::{LimitRun, RandomSource, DEFAULT_STEP_BUDGET};
use minfact::stats::spine_stays_positive;
use minfact::Result;

fn main() -> Result<()> {
    let mut run = LimitRun::with_radius(RandomSource::new(7), 5, DEFAULT_STEP_BUDGET)?;
    println!("explored {} vertices for labels -5..=6", run.tree().len());
    for i in -5..=5 {
        // Widens the labelling until every vertex the walk visits is labelled.
        match run.resolve_trajectory(i, 1 << 16) {
            Ok(x) => println!("X_{i}: values {:?} at {:?}", x.values, x.breaks),
            Err(e) => println!("X_{i}: {e}"),
        }
    }
    println!("X_1 stays positive: {}", spine_stays_positive(run.tree()));
    for a in 0..=2 {
        println!("I_{a} = {:?}", run.limit_entering_indices(a, 1 << 20)?);
    }
    println!("{}", run.fragment().to_dot("kesten"));
    Ok(())
}
