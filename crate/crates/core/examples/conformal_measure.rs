//! Multipliers `λ_ω` and the conformal family `ν_ω` on a random
//! piecewise-affine example, with the conformality defect
//! `ν_{σω}(L_ω f) − λ_ω ν_ω(f)` for each test function.

use openrds::cocycle::{build_affine_ly_system, AffineFiberSpec, DrivingSystem};
use openrds::operator::{Openness, TransferCocycle};
use openrds::quenched::{conformal_eval, fiber_lambda, standard_battery, LambdaOptions};
use openrds::IntervalSet;

fn main() -> openrds::Result<()> {
    let spec = |bp: Vec<f64>, slopes: Vec<f64>| AffineFiberSpec {
        breakpoints: bp,
        slopes,
        starts: None,
        allow_non_expanding: false,
    };
    let sys = build_affine_ly_system(
        &[
            spec(vec![0.0, 0.5, 1.0], vec![2.0, 2.0]),
            spec(vec![0.0, 0.3, 1.0], vec![10.0 / 3.0, 10.0 / 7.0]),
        ],
        &[
            IntervalSet::from_pairs(&[[0.25, 0.3125]]),
            IntervalSet::from_pairs(&[[0.75, 0.8125]]),
        ],
        1.0,
        DrivingSystem::iid(vec![0.5, 0.5])?,
    )?;
    let tc = TransferCocycle::with_resolution(&sys, 4096)?;
    let orbit = sys.driving().sample_orbit(0, 8, 80);
    let opts = LambdaOptions {
        n_max: 40,
        tol: 1e-10,
    };

    for p in 0..6 {
        let lam = fiber_lambda(&tc, &orbit, p, opts, Openness::Open)?;
        println!(
            "λ at {p} (symbol {}) = {:.10} ± {:.1e}",
            orbit.symbol(p)?,
            lam.value,
            lam.error
        );
    }

    let lam = fiber_lambda(&tc, &orbit, 0, opts, Openness::Open)?;
    let m = tc.matrix(orbit.symbol(0)?, Openness::Open);
    println!("\n{:<28} {:>14} {:>12}", "f", "ν(f)", "defect");
    for f in standard_battery() {
        let g = f.on_grid(tc.grid());
        let nu = conformal_eval(&tc, &orbit, 0, &g, opts, Openness::Open)?;
        let next = conformal_eval(&tc, &orbit, 1, &m.apply(&g)?, opts, Openness::Open)?;
        println!(
            "{:<28} {:>14.10} {:>12.2e}",
            f.id(),
            nu.value,
            next.value - lam.value * nu.value
        );
    }
    Ok(())
}
