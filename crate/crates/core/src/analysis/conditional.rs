use serde::Serialize;

use crate::cocycle::Orbit;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::operator::{GridFunction, Openness, TransferCocycle};
use crate::oracle::{survivor_intervals, survivors_into};
use crate::quenched::{
    closed_conformal_eval, closed_is_lebesgue, unit_on_fiber, Estimate, LambdaOptions, Raccim,
};

/// Iterates skipped before checking the residual trend.
pub const BURN_IN: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct ConditionalSeries {
    pub set: [f64; 2],
    /// `ν_{ω,c}(T^{-k}A | X_{ω,k})` for `k = 0..len`.
    pub conditioned: Vec<f64>,
    /// `η_{σᵏω}(A)`.
    pub eta: Vec<Estimate>,
    pub residual: Vec<f64>,
    /// Residuals never increase past burn-in beyond the bracket error.
    pub monotone: bool,
    /// The conditioning mass underflowed before depth `n`.
    pub truncated: bool,
}

/// `ν_{ω,c}(T^{-k}A ∩ X_{ω,k}) / ν_{ω,c}(X_{ω,k})` for `k = 0..=n`, stopping
/// early if the conditioning mass vanishes.
fn conditioned_masses(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    a: &IntervalSet,
    n: usize,
    opts: LambdaOptions,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    if closed_is_lebesgue(tc) {
        for k in 0..=n {
            let total = survivor_intervals(tc.system(), orbit, p, k)?.total_length();
            if total <= 0.0 {
                break;
            }
            out.push(survivors_into(tc.system(), orbit, p, k, a)?.total_length() / total);
        }
        return Ok(out);
    }
    // L^k_c(1_{X_{ω,k}}) = 1_{I_{σᵏω}} L^k 1_ω; the closed multipliers cancel.
    let ind_a = GridFunction::indicator(tc.grid().clone(), a);
    let mut v = unit_on_fiber(tc, orbit.symbol(p)?, Openness::Open).into_values();
    let mut next = vec![0.0; v.len()];
    for k in 0..=n as i64 {
        let here = tc
            .function(v.clone())?
            .mul(tc.survivor_indicator(orbit.symbol(p + k)?))?;
        let total = closed_conformal_eval(tc, orbit, p + k, &here, opts)?;
        if total.value - total.error <= 0.0 {
            break;
        }
        let part = closed_conformal_eval(tc, orbit, p + k, &here.mul(&ind_a)?, opts)?;
        out.push(part.value / total.value);
        if k == n as i64 {
            break;
        }
        tc.step_slice(orbit, p + k, &v, &mut next, Openness::Open)?;
        let s = next.iter().cloned().fold(0.0, f64::max);
        if s == 0.0 {
            break;
        }
        next.iter_mut().for_each(|x| *x /= s);
        std::mem::swap(&mut v, &mut next);
    }
    Ok(out)
}

/// Residuals `|ν_{ω,c}(T^{-k}A | X_{ω,k}) − η_{σᵏω}(A)|` for each interval `A`.
pub fn conditional_invariance_residual(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    sets: &[Interval],
    n: usize,
    depth: usize,
    opts: LambdaOptions,
) -> Result<Vec<ConditionalSeries>> {
    if sets.is_empty() {
        return Err(Error::config("sets", "at least one set A is required"));
    }
    let rac = (0..=n as i64)
        .map(|k| Raccim::new(tc, orbit, p + k, depth, opts))
        .collect::<Result<Vec<_>>>()?;
    sets.iter()
        .map(|iv| {
            let a = IntervalSet::from_intervals(vec![*iv]);
            let conditioned = conditioned_masses(tc, orbit, p, &a, n, opts)?;
            let ind = GridFunction::indicator(tc.grid().clone(), &a);
            let eta = rac[..conditioned.len()]
                .iter()
                .map(|r| r.eval(&ind))
                .collect::<Result<Vec<_>>>()?;
            let residual: Vec<f64> = conditioned
                .iter()
                .zip(&eta)
                .map(|(c, e)| (c - e.value).abs())
                .collect();
            let monotone = (BURN_IN + 1..residual.len())
                .all(|k| residual[k] <= residual[k - 1] + eta[k].error + eta[k - 1].error + 1e-12);
            Ok(ConditionalSeries {
                set: [iv.lo, iv.hi],
                truncated: conditioned.len() < n + 1,
                conditioned,
                eta,
                residual,
                monotone,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};

    #[test]
    fn cantor_left_third_is_one_half() {
        let sys = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 81).unwrap();
        let orbit = Orbit::periodic(&[0], 40, 40);
        let sets = [Interval::new(0.0, 1.0 / 3.0), Interval::new(0.0, 1.0)];
        let r =
            conditional_invariance_residual(&tc, &orbit, 0, &sets, 8, 12, LambdaOptions::default())
                .unwrap();
        assert!(r[0].conditioned[1..]
            .iter()
            .all(|c| (c - 0.5).abs() < 1e-12));
        assert!((r[0].eta[8].value - 0.5).abs() < 1e-9);
        assert!(r[0].monotone && !r[0].truncated);
        assert!(r[1].residual.iter().all(|x| *x < 1e-9));
    }

    #[test]
    fn grid_route_matches_at_t_half() {
        let sys = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            0.5,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 81).unwrap();
        let orbit = Orbit::periodic(&[0], 40, 40);
        let r = conditional_invariance_residual(
            &tc,
            &orbit,
            0,
            &[Interval::new(0.0, 1.0 / 3.0)],
            6,
            12,
            LambdaOptions::default(),
        )
        .unwrap();
        assert!(
            (r[0].conditioned[6] - 0.5).abs() < 1e-9,
            "{:?}",
            r[0].conditioned
        );
    }
}
