//! Survivor-conditioned mass of `[0, ⅓)` on the Cantor system, converging
//! to the conditionally invariant measure.

use openrds::analysis::conditional_invariance_residual;
use openrds::cocycle::{build_beta_system, DrivingSystem, Orbit};
use openrds::operator::TransferCocycle;
use openrds::quenched::LambdaOptions;
use openrds::{Interval, IntervalSet};

fn main() -> openrds::Result<()> {
    let sys = build_beta_system(
        &[3.0],
        &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
        1.0,
        DrivingSystem::constant(),
        false,
    )?;
    let tc = TransferCocycle::with_resolution(&sys, 243)?;
    let orbit = Orbit::periodic(&[0], 40, 40);
    let sets = [
        Interval::new(0.0, 1.0 / 3.0),
        Interval::new(0.0, 1.0 / 9.0),
        Interval::new(0.1, 0.5),
    ];
    for s in
        conditional_invariance_residual(&tc, &orbit, 0, &sets, 12, 20, LambdaOptions::default())?
    {
        println!(
            "A = [{:.4}, {:.4}): monotone {}",
            s.set[0], s.set[1], s.monotone
        );
        for (k, (c, e)) in s.conditioned.iter().zip(&s.eta).enumerate().step_by(3) {
            println!(
                "  k = {k:2}  conditioned {c:.10}  η {:.10}  residual {:.1e}",
                e.value, s.residual[k]
            );
        }
    }
    Ok(())
}
