//! Structural checks on the random β example: hole components, preimage
//! counts, the averaged covering margin and Lasota–Yorke constants.

use openrds::analysis::{condition_check, ly_constants, ConditionOptions};
use openrds::cocycle::{build_beta_system, DrivingSystem};
use openrds::operator::TransferCocycle;
use openrds::quenched::LambdaOptions;
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
    let r = condition_check(
        &sys,
        ConditionOptions {
            n1: 4,
            n2: 1,
            ..Default::default()
        },
    )?;
    for f in &r.fibers {
        println!(
            "fiber {}: ζ¹ = {}, hole components {}, F¹ = {}",
            f.symbol, f.zeta1, f.hole_components, f.f1
        );
    }
    println!("LHS over {} words: {:.6}", r.words, r.lhs);
    for m in &r.q1_margins {
        println!("  N₂ = {}: RHS {:.6}, margin {:+.6}", m.n2, m.rhs, m.margin);
    }
    println!("covering condition holds: {}", r.q1_pass);

    let tc = TransferCocycle::with_resolution(&sys, 256)?;
    let orbit = sys.driving().sample_orbit(0, 16, 64);
    for n in 1..=4 {
        let c = ly_constants(&tc, &orbit, 0, n, LambdaOptions::default())?;
        println!(
            "n = {n}: ξ = {}, A = {:.4}, B = {:.4}, Q = {:.4}, K = {:.4}",
            c.xi, c.a, c.b, c.q, c.k
        );
    }
    Ok(())
}
