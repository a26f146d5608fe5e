//! Dimension of the middle-thirds Cantor set three ways: the closed-form
//! pressure root, Monte Carlo bisection on the grid, and box counting.

use openrds::analysis::{bowen_dimension, box_count_comparison, Estimator, MonteCarloOptions};
use openrds::cocycle::{build_beta_system, DrivingSystem};
use openrds::IntervalSet;

fn main() -> openrds::Result<()> {
    let sys = build_beta_system(
        &[3.0],
        &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
        1.0,
        DrivingSystem::constant(),
        false,
    )?;
    let exact = 2f64.ln() / 3f64.ln();
    let opts = MonteCarloOptions {
        orbits: 8,
        depth: 30,
        resolution: 243,
        ..Default::default()
    };

    let analytic = bowen_dimension(&sys, Estimator::Analytic, 1e-12, opts)?;
    let sampled = bowen_dimension(&sys, Estimator::Sandwich, 1e-4, opts)?;
    let boxes = box_count_comparison(&sys, 0, 4..=10)?;

    println!("log 2 / log 3      {exact:.12}");
    println!("analytic root      {:.12}", analytic.h);
    println!(
        "Monte Carlo root   {:.12}  ({} bisection steps)",
        sampled.h,
        sampled.steps.len()
    );
    println!("box-count slope    {:.12}", boxes.slope);
    Ok(())
}
