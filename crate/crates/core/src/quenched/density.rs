use serde::Serialize;

use super::lambda::{functional_lambda, unit_on_fiber, LambdaOptions};
use crate::cocycle::Orbit;
use crate::error::{Error, Result};
use crate::operator::{GridFunction, Openness, SupportMask, TransferCocycle};

/// Consecutive unchanged masks taken as evidence that `D_{ω,n}` stabilized.
pub const STABLE_RUN: usize = 5;

/// `D_{σ^p ω, k} = supp L^k_{σ^{p−k}ω} 1` by boolean propagation through the
/// sparsity pattern of the open matrices.
pub fn d_mask(tc: &TransferCocycle, orbit: &Orbit, p: i64, k: usize) -> Result<SupportMask> {
    let start = p - k as i64;
    orbit.check_range(start, p)?;
    let mut mask = tc
        .survivor_indicator(orbit.symbol(start)?)
        .support()
        .bits()
        .to_vec();
    for j in 0..k as i64 {
        let m = tc.matrix(orbit.symbol(start + j)?, Openness::Open);
        let mut next = vec![false; mask.len()];
        for (i, out) in next.iter_mut().enumerate() {
            *out = m.row(i).any(|(c, v)| v > 0.0 && mask[c]);
        }
        mask = next;
    }
    Ok(SupportMask::new(mask))
}

#[derive(Clone, Debug, Serialize)]
pub struct DMaskSequence {
    pub masks: Vec<SupportMask>,
    /// First `k` after which the mask stayed fixed for [`STABLE_RUN`] steps.
    pub n_infinity: Option<usize>,
}

impl DMaskSequence {
    /// The last computed mask, standing in for `D_{ω,∞}`.
    pub fn limit(&self) -> &SupportMask {
        self.masks.last().unwrap()
    }
}

/// `D_{σ^p ω, k}` for `k = 0..=k_max`, with empirical stabilization index.
pub fn d_masks(tc: &TransferCocycle, orbit: &Orbit, p: i64, k_max: usize) -> Result<DMaskSequence> {
    let masks: Vec<SupportMask> = (0..=k_max)
        .map(|k| d_mask(tc, orbit, p, k))
        .collect::<Result<_>>()?;
    let mut n_infinity = None;
    for k in 0..masks.len() {
        if k + STABLE_RUN < masks.len() && (1..=STABLE_RUN).all(|j| masks[k + j] == masks[k]) {
            n_infinity = Some(k);
            break;
        }
    }
    Ok(DMaskSequence { masks, n_infinity })
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityEstimate {
    #[serde(serialize_with = "serialize_values")]
    pub q: GridFunction,
    pub position: i64,
    pub depth: usize,
    /// `‖q_n − q_{n−1}‖_∞` between consecutive backward depths.
    pub residual: f64,
    /// Relative error of the normalization `Λ_ω(Lⁿ1)`.
    pub normalization_error: f64,
}

fn serialize_values<S: serde::Serializer>(
    q: &GridFunction,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(q.values())
}

fn normalized_pushforward(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    depth: usize,
    opts: LambdaOptions,
) -> Result<(GridFunction, f64)> {
    let start = p - depth as i64;
    orbit.check_range(start, p)?;
    let mut cur = unit_on_fiber(tc, orbit.symbol(start)?, Openness::Open).into_values();
    let mut next = vec![0.0; cur.len()];
    for j in 0..depth as i64 {
        tc.step_slice(orbit, start + j, &cur, &mut next, Openness::Open)?;
        let s = next.iter().cloned().fold(0.0, f64::max);
        if s == 0.0 {
            return Err(Error::DegenerateSystem(format!(
                "L^n 1 vanished at orbit position {}",
                start + j + 1
            )));
        }
        for v in &mut next {
            *v /= s;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let w = tc.function(cur)?;
    let lam = functional_lambda(tc, orbit, p, &w, opts, Openness::Open)?;
    if lam.lo <= 0.0 {
        return Err(Error::DegenerateSystem(format!(
            "Λ(Lⁿ1) bracket [{}, {}] touches zero",
            lam.lo, lam.hi
        )));
    }
    Ok((w.scale(1.0 / lam.value), lam.error / lam.lo))
}

/// `q_{σ^p ω} ≈ L^n_{σ^{p−n}ω} 1 / Λ(L^n 1)`, so that `Λ(q) = 1`.
pub fn invariant_density(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    depth: usize,
    opts: LambdaOptions,
) -> Result<DensityEstimate> {
    if depth == 0 {
        return Err(Error::config("depth", "backward depth must be at least 1"));
    }
    let (q, normalization_error) = normalized_pushforward(tc, orbit, p, depth, opts)?;
    let (prev, _) = normalized_pushforward(tc, orbit, p, depth - 1, opts)?;
    let residual = q.sub(&prev)?.sup_norm();
    Ok(DensityEstimate {
        q,
        position: p,
        depth,
        residual,
        normalization_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{
        build_affine_ly_system, build_beta_system, AffineFiberSpec, DrivingSystem,
    };
    use crate::interval::IntervalSet;

    #[test]
    fn flat_densities() {
        let orbit = Orbit::periodic(&[0], 40, 40);
        let doubling = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&doubling, 32).unwrap();
        let d = invariant_density(&tc, &orbit, 0, 10, LambdaOptions::default()).unwrap();
        assert!(d.q.values().iter().all(|&v| (v - 1.0).abs() < 1e-13));
        assert!(d.residual < 1e-13);

        let cantor = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&cantor, 81).unwrap();
        let d = invariant_density(&tc, &orbit, 0, 12, LambdaOptions::default()).unwrap();
        assert!(
            d.q.values().iter().all(|&v| (v - 1.0).abs() < 1e-12),
            "{:?}",
            d.q.values()
        );

        let tent = build_affine_ly_system(
            &[AffineFiberSpec {
                breakpoints: vec![0.0, 0.5, 1.0],
                slopes: vec![2.0, -2.0],
                starts: None,
                allow_non_expanding: false,
            }],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&tent, 64).unwrap();
        let d = invariant_density(&tc, &orbit, 0, 8, LambdaOptions::default()).unwrap();
        assert!(d.q.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn masks_nest_and_stabilize() {
        let sys = build_beta_system(
            &[2.5],
            &[IntervalSet::from_pairs(&[[0.8, 1.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 50).unwrap();
        let orbit = Orbit::periodic(&[0], 30, 5);
        let seq = d_masks(&tc, &orbit, 0, 20).unwrap();
        // D_{ω,1} may reach into H_ω, so nesting starts at k = 1.
        for w in seq.masks[1..].windows(2) {
            assert!(w[1].is_subset_of(&w[0]));
        }
        assert!(seq.n_infinity.is_some());
    }

    #[test]
    fn backward_window_is_checked() {
        let sys = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 8).unwrap();
        let orbit = Orbit::periodic(&[0], 3, 10);
        assert!(matches!(
            invariant_density(&tc, &orbit, 0, 5, LambdaOptions::default()),
            Err(Error::Orbit(_))
        ));
    }
}
