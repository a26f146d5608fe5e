use serde::{Deserialize, Serialize};

use super::pressure::{mean_stderr, Estimator, MonteCarloOptions, PressureSampler};
use crate::cocycle::RandomOpenSystem;
use crate::error::{Error, Result};
use crate::oracle::{analytic_root, box_count_dimension, survivor_intervals, BoxCount};

/// Orbit cap for Monte Carlo sign decisions.
pub const MAX_ORBITS: usize = 1 << 16;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionMethod {
    BisectionAnalytic,
    BisectionMonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BisectionStep {
    pub t: f64,
    pub ep: f64,
    pub stderr: f64,
    pub orbits: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub h: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// `t_hi − t_lo`.
    pub bracket: f64,
    pub ep_lo: f64,
    pub ep_hi: f64,
    pub method: DimensionMethod,
    /// Set when the root sits at `t = 0` or `t = 1`.
    pub boundary: bool,
    pub steps: Vec<BisectionStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_count: Option<BoxCount>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Sign {
    Positive,
    Negative,
    Zero,
}

/// Decides the sign of `EP(t)` once the 95% interval excludes zero,
/// doubling the orbit sample as needed.
fn monte_carlo_sign(
    system: &RandomOpenSystem,
    t: f64,
    estimator: Estimator,
    opts: MonteCarloOptions,
) -> Result<(Sign, BisectionStep)> {
    let sampler = PressureSampler::new(system, Some(t), estimator, opts)?;
    let mut vals: Vec<f64> = sampler
        .values(0..opts.orbits)?
        .into_iter()
        .map(|v| v.0)
        .collect();
    loop {
        let (mean, se) = mean_stderr(&vals);
        let step = BisectionStep {
            t,
            ep: mean,
            stderr: se,
            orbits: vals.len(),
        };
        if se == 0.0 && mean.abs() <= 1e-13 {
            return Ok((Sign::Zero, step));
        }
        if mean - Z95 * se > 0.0 {
            return Ok((Sign::Positive, step));
        }
        if mean + Z95 * se < 0.0 {
            return Ok((Sign::Negative, step));
        }
        let k = vals.len();
        if 2 * k > MAX_ORBITS {
            return Err(Error::Inconclusive(format!(
                "sign of EP({t}) unresolved with {k} orbits: {mean} ± {}",
                Z95 * se
            )));
        }
        vals.extend(sampler.values(k..2 * k)?.into_iter().map(|v| v.0));
    }
}

/// Root `h` of `t ↦ EP(t)` on `[0, 1]` by bisection down to `tol_t`.
pub fn bowen_dimension(
    system: &RandomOpenSystem,
    estimator: Estimator,
    tol_t: f64,
    opts: MonteCarloOptions,
) -> Result<DimensionReport> {
    if !(tol_t > 0.0) {
        return Err(Error::config("tol_t", "must be positive"));
    }
    if estimator == Estimator::Analytic {
        let r = analytic_root(system, tol_t)?;
        return Ok(DimensionReport {
            h: r.h,
            t_lo: r.t_lo,
            t_hi: r.t_hi,
            bracket: r.t_hi - r.t_lo,
            ep_lo: r.ep_lo,
            ep_hi: r.ep_hi,
            method: DimensionMethod::BisectionAnalytic,
            boundary: r.t_lo == r.t_hi && (r.h == 0.0 || r.h == 1.0),
            steps: Vec::new(),
            box_count: None,
        });
    }
    let mut steps = Vec::new();
    let boundary = |h: f64, step: BisectionStep, steps: Vec<BisectionStep>| DimensionReport {
        h,
        t_lo: h,
        t_hi: h,
        bracket: 0.0,
        ep_lo: step.ep,
        ep_hi: step.ep,
        method: DimensionMethod::BisectionMonteCarlo,
        boundary: true,
        steps,
        box_count: None,
    };
    let (s0, st0) = monte_carlo_sign(system, 0.0, estimator, opts)?;
    steps.push(st0);
    if s0 != Sign::Positive {
        return Ok(boundary(0.0, st0, steps));
    }
    let (s1, st1) = monte_carlo_sign(system, 1.0, estimator, opts)?;
    steps.push(st1);
    match s1 {
        Sign::Zero => return Ok(boundary(1.0, st1, steps)),
        Sign::Positive => {
            return Err(Error::Numerics(format!(
                "EP(1) = {} is positive; expected EP(1) ≤ 0",
                st1.ep
            )))
        }
        Sign::Negative => {}
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut ep_lo, mut ep_hi) = (st0.ep, st1.ep);
    while hi - lo > tol_t {
        let mid = 0.5 * (lo + hi);
        let (s, st) = monte_carlo_sign(system, mid, estimator, opts)?;
        steps.push(st);
        match s {
            Sign::Positive => {
                lo = mid;
                ep_lo = st.ep;
            }
            Sign::Negative => {
                hi = mid;
                ep_hi = st.ep;
            }
            Sign::Zero => {
                lo = mid;
                hi = mid;
                ep_lo = st.ep;
                ep_hi = st.ep;
            }
        }
    }
    Ok(DimensionReport {
        h: 0.5 * (lo + hi),
        t_lo: lo,
        t_hi: hi,
        bracket: hi - lo,
        ep_lo,
        ep_hi,
        method: DimensionMethod::BisectionMonteCarlo,
        boundary: false,
        steps,
        box_count: None,
    })
}

/// Box-counting slope of the survivor sets `X_{ω,n}`, `n ∈ depths`, along one
/// sampled orbit.
pub fn box_count_comparison(
    system: &RandomOpenSystem,
    seed: u64,
    depths: std::ops::RangeInclusive<usize>,
) -> Result<BoxCount> {
    let orbit = system.driving().sample_orbit(seed, 0, *depths.end() + 1);
    let sets = depths
        .map(|n| survivor_intervals(system, &orbit, 0, n))
        .collect::<Result<Vec<_>>>()?;
    box_count_dimension(&sets, None)
}
