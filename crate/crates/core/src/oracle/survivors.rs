use std::io::Write;

use crate::cocycle::{FiberMap, Orbit, RandomOpenSystem};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;

/// Component count above which survivor computations give up.
pub const MAX_COMPONENTS: usize = 10_000_000;

/// `T⁻¹(set)` under one fiber map.
pub fn fiber_preimage(map: &FiberMap, set: &IntervalSet) -> IntervalSet {
    let mut out = Vec::new();
    for b in map.branches() {
        for iv in set.iter() {
            if let Some(p) = b.preimage_of(iv) {
                out.push(p);
            }
        }
    }
    IntervalSet::from_intervals(out)
}

fn check_size(set: &IntervalSet) -> Result<()> {
    if set.len() > MAX_COMPONENTS {
        return Err(Error::Depth(format!(
            "{} survivor components exceed the cap of {MAX_COMPONENTS}",
            set.len()
        )));
    }
    Ok(())
}

/// `X_{σ^p ω, n}`: points of `I_{σ^p ω}` whose first `n` images avoid the
/// holes, via `X_{ω,n} = I_ω ∩ T_ω⁻¹(X_{σω,n−1})`.
pub fn survivor_intervals(
    system: &RandomOpenSystem,
    orbit: &Orbit,
    p: i64,
    n: usize,
) -> Result<IntervalSet> {
    survivors_into(system, orbit, p, n, &IntervalSet::unit())
}

/// `X_{σ^p ω, n} ∩ T^{-n}_{σ^p ω}(A)`: survivors whose `n`-th image lands in
/// `A ⊆ I_{σ^{p+n} ω}`.
pub fn survivors_into(
    system: &RandomOpenSystem,
    orbit: &Orbit,
    p: i64,
    n: usize,
    target: &IntervalSet,
) -> Result<IntervalSet> {
    orbit.check_range(p, p + n as i64)?;
    let last = orbit.symbol(p + n as i64)?;
    let mut x = system.fiber(last).hole.survivors().intersection(target);
    for k in (p..p + n as i64).rev() {
        let f = system.fiber(orbit.symbol(k)?);
        x = f.hole.survivors().intersection(&fiber_preimage(&f.map, &x));
        check_size(&x)?;
    }
    Ok(x)
}

/// `X_{σ^p ω, n}` for `n = 0..=n_max`.
pub fn survivor_sequence(
    system: &RandomOpenSystem,
    orbit: &Orbit,
    p: i64,
    n_max: usize,
) -> Result<Vec<IntervalSet>> {
    (0..=n_max)
        .map(|n| survivor_intervals(system, orbit, p, n))
        .collect()
}

/// `T^{-n}_{σ^p ω}(set)` without any hole restriction.
pub fn pullback(
    system: &RandomOpenSystem,
    orbit: &Orbit,
    p: i64,
    n: usize,
    set: &IntervalSet,
) -> Result<IntervalSet> {
    if n > 0 {
        orbit.check_range(p, p + n as i64 - 1)?;
    }
    let mut x = set.clone();
    for k in (p..p + n as i64).rev() {
        x = fiber_preimage(&system.fiber(orbit.symbol(k)?).map, &x);
        check_size(&x)?;
    }
    Ok(x)
}

/// Writes `depth,left,right` rows, one per component.
pub fn write_survivors_csv(sets: &[IntervalSet], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["depth", "left", "right"])?;
    for (d, s) in sets.iter().enumerate() {
        for iv in s.iter() {
            wr.write_record(&[
                d.to_string(),
                format!("{:.17e}", iv.lo),
                format!("{:.17e}", iv.hi),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};

    fn cantor() -> RandomOpenSystem {
        build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn cantor_construction() {
        let sys = cantor();
        let orbit = Orbit::from_forward(vec![0; 12]);
        let x0 = survivor_intervals(&sys, &orbit, 0, 0).unwrap();
        assert_eq!(x0.len(), 2);
        assert!((x0.total_length() - 2.0 / 3.0).abs() < 1e-15);
        let x2 = survivor_intervals(&sys, &orbit, 0, 2).unwrap();
        assert_eq!(x2.len(), 8);
        assert!(x2.iter().all(|iv| (iv.length() - 1.0 / 27.0).abs() < 1e-15));
        assert!((x2.total_length() - 8.0 / 27.0).abs() < 1e-15);
        for n in 0..10 {
            let m = survivor_intervals(&sys, &orbit, 0, n)
                .unwrap()
                .total_length();
            assert!((m - (2.0f64 / 3.0).powi(n as i32 + 1)).abs() < 1e-13);
        }
    }

    #[test]
    fn no_hole_survives_everything() {
        let sys = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let orbit = Orbit::from_forward(vec![0; 6]);
        for n in 0..5 {
            assert_eq!(
                survivor_intervals(&sys, &orbit, 0, n).unwrap().to_pairs(),
                vec![[0.0, 1.0]]
            );
        }
    }

    #[test]
    fn csv_rows() {
        let sys = cantor();
        let orbit = Orbit::from_forward(vec![0; 3]);
        let seq = survivor_sequence(&sys, &orbit, 0, 1).unwrap();
        let mut buf = Vec::new();
        write_survivors_csv(&seq, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 + 4);
    }
}
