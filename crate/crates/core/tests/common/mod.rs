#![allow(dead_code)]

pub mod props;

use openrds::cocycle::{
    build_affine_ly_system, build_beta_system, AffineFiberSpec, DrivingSystem, RandomOpenSystem,
};
use openrds::IntervalSet;

pub const THIRD: f64 = 1.0 / 3.0;

/// Tripling with the middle third removed.
pub fn cantor(t: f64) -> RandomOpenSystem {
    build_beta_system(
        &[3.0],
        &[IntervalSet::from_pairs(&[[THIRD, 2.0 * THIRD]])],
        t,
        DrivingSystem::constant(),
        false,
    )
    .unwrap()
}

/// Fair iid choice between doubling and quadrupling, each with its last
/// branch removed.
pub fn random_beta(t: f64) -> RandomOpenSystem {
    build_beta_system(
        &[2.0, 4.0],
        &[
            IntervalSet::from_pairs(&[[0.5, 1.0]]),
            IntervalSet::from_pairs(&[[0.75, 1.0]]),
        ],
        t,
        DrivingSystem::iid(vec![0.5, 0.5]).unwrap(),
        false,
    )
    .unwrap()
}

/// Two full-branch affine maps with slopes (2, 2) and (10/3, 10/7), holes
/// on dyadic points.
pub fn ly_example(t: f64) -> RandomOpenSystem {
    let specs = [
        AffineFiberSpec {
            breakpoints: vec![0.0, 0.5, 1.0],
            slopes: vec![2.0, 2.0],
            starts: None,
            allow_non_expanding: false,
        },
        AffineFiberSpec {
            breakpoints: vec![0.0, 0.3, 1.0],
            slopes: vec![10.0 / 3.0, 10.0 / 7.0],
            starts: None,
            allow_non_expanding: false,
        },
    ];
    build_affine_ly_system(
        &specs,
        &[
            IntervalSet::from_pairs(&[[0.25, 0.3125]]),
            IntervalSet::from_pairs(&[[0.75, 0.8125]]),
        ],
        t,
        DrivingSystem::iid(vec![0.5, 0.5]).unwrap(),
    )
    .unwrap()
}

/// Dimension of the random β example: the root of `½ log 2^{−t} + ½ log 3·4^{−t}`.
pub fn random_beta_dimension() -> f64 {
    3f64.ln() / (3.0 * 2f64.ln())
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
