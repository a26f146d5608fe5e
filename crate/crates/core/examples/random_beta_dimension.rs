//! Random β-transformations: doubling or quadrupling with a fair coin, each
//! losing its last branch. The dimension of the surviving set solves
//! `½ log 2^{−t} + ½ log 3·4^{−t} = 0`.

use std::time::Instant;

use openrds::analysis::{bowen_dimension, pressure_curve, Estimator, MonteCarloOptions};
use openrds::cocycle::{build_beta_system, DrivingSystem};
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
    let opts = MonteCarloOptions {
        orbits: 256,
        depth: 30,
        resolution: 64,
        ..Default::default()
    };

    let curve = pressure_curve(
        &sys,
        &[0.0, 0.25, 0.5, 0.75, 1.0],
        Estimator::Sandwich,
        opts,
    )?;
    for s in &curve.samples {
        println!("EP({:.2}) = {:+.6} ± {:.1e}", s.t, s.ep, s.stderr);
    }

    let started = Instant::now();
    let mc = bowen_dimension(&sys, Estimator::Sandwich, 2e-3, opts)?;
    println!(
        "Monte Carlo h = {:.6} in {:.2} s",
        mc.h,
        started.elapsed().as_secs_f64()
    );
    let exact = bowen_dimension(&sys, Estimator::Analytic, 1e-12, opts)?;
    println!("analytic h    = {:.12}", exact.h);
    println!("log 3 / log 8 = {:.12}", 3f64.ln() / 8f64.ln());
    Ok(())
}
