//! Exponential convergence `C_n = ‖λ⁻ⁿLⁿ(f q) − ν(f q) q‖` on the Cantor
//! system, fitted per test function.

use openrds::analysis::{decay_fit, DecayOptions};
use openrds::cocycle::{build_beta_system, DrivingSystem, Orbit};
use openrds::operator::TransferCocycle;
use openrds::quenched::standard_battery;
use openrds::IntervalSet;

fn main() -> openrds::Result<()> {
    let sys = build_beta_system(
        &[3.0],
        &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
        1.0,
        DrivingSystem::constant(),
        false,
    )?;
    let tc = TransferCocycle::with_resolution(&sys, 1000)?;
    let orbit = Orbit::periodic(&[0], 80, 80);
    let r = decay_fit(&tc, &orbit, 0, &standard_battery(), DecayOptions::default())?;

    println!(
        "{:<28} {:>8} {:>8} {:>10} {}",
        "f", "κ̂", "R²", "C_10", "status"
    );
    for s in &r.series {
        let status = if s.exact {
            "exact"
        } else if s.passes() {
            "geometric"
        } else {
            "inconclusive"
        };
        println!(
            "{:<28} {:>8} {:>8} {:>10.2e} {status}",
            s.test_fn,
            s.kappa.map_or("-".into(), |k| format!("{k:.4}")),
            s.fit.map_or("-".into(), |f| format!("{:.4}", f.r_squared)),
            s.c[10],
        );
    }
    if let Some(p) = r.pooled {
        println!(
            "pooled κ̂ = {:.4} over {} series (R² {:.4})",
            p.kappa, p.series, p.r_squared
        );
    }
    Ok(())
}
