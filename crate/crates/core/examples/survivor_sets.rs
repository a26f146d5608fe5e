//! Exact survivor intervals along a random orbit, cross-checked against the
//! grid operator through pointwise preimage sums.

use openrds::cocycle::{build_beta_system, DrivingSystem};
use openrds::operator::{Openness, TransferCocycle};
use openrds::oracle::{point_transfer, survivor_sequence};
use openrds::IntervalSet;

fn main() -> openrds::Result<()> {
    let sys = build_beta_system(
        &[2.0, 4.0],
        &[
            IntervalSet::from_pairs(&[[0.5, 1.0]]),
            IntervalSet::from_pairs(&[[0.75, 1.0]]),
        ],
        1.0,
        DrivingSystem::iid(vec![0.5, 0.5])?,
        false,
    )?;
    let orbit = sys.driving().sample_orbit(9, 0, 16);
    println!("word {:?}", orbit.word(0, 10)?);
    for (n, x) in survivor_sequence(&sys, &orbit, 0, 10)?.iter().enumerate() {
        println!(
            "X_{n:<2} {:5} components, Lebesgue {:.8}",
            x.len(),
            x.total_length()
        );
    }

    // Lⁿ 1 at a point counts surviving preimages weighted by 1/|(Tⁿ)'|.
    let tc = TransferCocycle::with_resolution(&sys, 1024)?;
    for n in [1, 4, 8] {
        let grid = tc.apply_n(&orbit, 0, n, &tc.one(), Openness::Open)?;
        for y in [0.1, 0.4, 0.9] {
            let exact = point_transfer(&sys, &orbit, 0, n, &|_| 1.0, y, Openness::Open)?;
            println!(
                "L^{n} 1 at {y}: grid {:.8}, preimage tree {exact:.8}",
                grid.eval(y)
            );
        }
    }
    Ok(())
}
