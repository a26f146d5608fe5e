//! Escape rate of the Cantor system: the decay of survivor mass against the
//! pressure gap between the closed and the open system.

use openrds::analysis::{escape_rate, Estimator, MonteCarloOptions};
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
    let r = escape_rate(
        &sys,
        20,
        Estimator::Analytic,
        MonteCarloOptions {
            orbits: 4,
            ..Default::default()
        },
    )?;
    println!("−log Leb(X_n) for n = 0..=20:");
    for (n, v) in r.neg_log_mass.iter().enumerate() {
        println!("  {n:2}  {v:.10}");
    }
    println!("direct slope   {:.12}", r.direct);
    println!("EP_c − EP      {:.12}", r.pressure_diff);
    println!("log(3/2)       {:.12}", 1.5f64.ln());
    println!("agree          {}", r.agree);
    Ok(())
}
