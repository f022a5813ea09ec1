//! Local statistics of large uniform factorizations and of the limit tree,
//! compared with their limit laws.

use minfact::random::DEFAULT_STEP_BUDGET;
use minfact::stats::{mc_limit_check, Source, Statistic};
use minfact::Result;

fn main() -> Result<()> {
    for stat in Statistic::ALL {
        let r = mc_limit_check(stat, Source::Kesten, 50_000, 11, DEFAULT_STEP_BUDGET)?;
        println!("{:<15} kesten      max |z| = {:.2}", stat.name(), r.max_abs_z());
    }
    let r = mc_limit_check(Statistic::StaysPositive, Source::Finite(5_000), 2_000, 11, DEFAULT_STEP_BUDGET)?;
    let cell = &r.cells[0];
    println!(
        "stays-positive  n = 5000    {:.4} ± {:.4} (limit {:.4}, z = {:.2})",
        cell.estimate.estimate, cell.estimate.se, cell.target, cell.z
    );
    Ok(())
}
