//! The quenched density `q_ω` of a random piecewise-affine map with holes, and
//! the invariant measure `μ_ω = q_ω ν_ω` of a few sets.

use openrds::cocycle::{build_affine_ly_system, AffineFiberSpec, DrivingSystem};
use openrds::operator::TransferCocycle;
use openrds::quenched::{
    d_masks, invariant_density, measure_battery, LambdaOptions, MeasureKind, TestFunction,
};
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
    let tc = TransferCocycle::with_resolution(&sys, 512)?;
    let orbit = sys.driving().sample_orbit(4, 64, 64);
    let opts = LambdaOptions::default();

    let d = invariant_density(&tc, &orbit, 0, 40, opts)?;
    let masks = d_masks(&tc, &orbit, 0, 40)?;
    println!(
        "depth {}, residual {:.1e}, normalization error {:.1e}, support {} of {} cells (stable from k = {:?})",
        d.depth,
        d.residual,
        d.normalization_error,
        masks.limit().count(),
        tc.dim(),
        masks.n_infinity
    );
    for (i, q) in d.q.values().iter().enumerate().step_by(64) {
        let c = tc.grid().cell(i);
        println!("  q on [{:.4}, {:.4}) = {q:.8}", c.lo, c.hi);
    }

    let sets = [
        TestFunction::Indicator([0.0, 0.25]),
        TestFunction::Indicator([0.25, 0.5]),
        TestFunction::Constant(1.0),
    ];
    let mu = measure_battery(&tc, &orbit, 0, MeasureKind::Mu, &sets, 40, opts)?;
    for (id, e) in &mu.entries {
        println!("μ({id}) = {:.10} ± {:.1e}", e.value, e.error);
    }
    Ok(())
}
