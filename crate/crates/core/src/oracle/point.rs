use rayon::prelude::*;

use crate::cocycle::{Orbit, RandomOpenSystem};
use crate::error::{Error, Result};
use crate::operator::Openness;

/// Largest iterate the preimage tree will enumerate.
pub const MAX_POINT_DEPTH: usize = 15;
/// Leaf count above which enumeration gives up.
pub const MAX_LEAVES: usize = 10_000_000;

/// `(L^n_{σ^p ω} f)(y)` as `Σ_{T^n x = y} g^{(n)}(x) f(x)`, by walking the
/// preimage tree backwards from `y`. Open mode drops every node that sits in
/// the hole of its own fiber.
pub fn point_transfer(
    system: &RandomOpenSystem,
    orbit: &Orbit,
    p: i64,
    n: usize,
    f: &(dyn Fn(f64) -> f64 + Sync),
    y: f64,
    openness: Openness,
) -> Result<f64> {
    if n > MAX_POINT_DEPTH {
        return Err(Error::Depth(format!(
            "point transfer depth {n} exceeds {MAX_POINT_DEPTH}"
        )));
    }
    if n == 0 {
        return Ok(f(y));
    }
    orbit.check_range(p, p + n as i64 - 1)?;
    let syms: Vec<usize> = (0..n)
        .map(|j| orbit.symbol(p + j as i64))
        .collect::<Result<_>>()?;
    let bound: f64 = syms
        .iter()
        .map(|&s| system.fiber(s).map.branches().len() as f64)
        .product();
    if bound > MAX_LEAVES as f64 {
        return Err(Error::Depth(format!(
            "preimage tree may reach {bound:.0} leaves, above {MAX_LEAVES}"
        )));
    }
    let open = openness == Openness::Open;
    let roots = system.preimages(syms[n - 1], y, open);
    let parts: Vec<f64> = roots
        .par_iter()
        .map(|pre| pre.weight * walk(system, &syms[..n - 1], f, pre.x, open))
        .collect();
    Ok(parts.iter().sum())
}

fn walk(
    system: &RandomOpenSystem,
    syms: &[usize],
    f: &(dyn Fn(f64) -> f64 + Sync),
    y: f64,
    open: bool,
) -> f64 {
    match syms.split_last() {
        None => f(y),
        Some((&s, rest)) => system
            .preimages(s, y, open)
            .iter()
            .map(|pre| pre.weight * walk(system, rest, f, pre.x, open))
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};
    use crate::interval::IntervalSet;

    #[test]
    fn spec_examples() {
        let doubling = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let orbit = Orbit::from_forward(vec![0; 4]);
        let one = |_: f64| 1.0;
        for y in [0.0, 0.3, 0.77] {
            let v = point_transfer(&doubling, &orbit, 0, 3, &one, y, Openness::Closed).unwrap();
            assert!((v - 1.0).abs() < 1e-15);
        }
        let cantor = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let v = point_transfer(&cantor, &orbit, 0, 2, &one, 0.1, Openness::Open).unwrap();
        assert!((v - 4.0 / 9.0).abs() < 1e-15);
        let id = |x: f64| x;
        assert_eq!(
            point_transfer(&cantor, &orbit, 0, 0, &id, 0.37, Openness::Open).unwrap(),
            0.37
        );
    }

    #[test]
    fn depth_cap() {
        let doubling = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let orbit = Orbit::from_forward(vec![0; 20]);
        let one = |_: f64| 1.0;
        assert!(matches!(
            point_transfer(&doubling, &orbit, 0, 16, &one, 0.5, Openness::Closed),
            Err(Error::Depth(_))
        ));
    }
}
