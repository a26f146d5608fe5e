use serde::Serialize;

use super::fit::{linear_fit, LinearFit};
use super::pressure::{mean_stderr, Estimator, MonteCarloOptions, PressureSampler};
use crate::cocycle::{derive_seed, Orbit, RandomOpenSystem};
use crate::error::{Error, Result};
use crate::operator::{Openness, TransferCocycle};
use crate::oracle::{analytic_pressure, is_analytic, survivor_intervals};
use crate::quenched::{closed_conformal_eval, closed_is_lebesgue, closed_lambda, unit_on_fiber};

/// Absolute floor on the agreement tolerance between the two routes.
pub const AGREE_FLOOR: f64 = 5e-3;

#[derive(Clone, Debug, Serialize)]
pub struct EscapeReport {
    /// Least-squares slope of `−log ν_c(X_{ω,k})` over `k ∈ [n/2, n]`.
    pub direct: f64,
    pub direct_stderr: f64,
    /// `EP_c − EP`.
    pub pressure_diff: f64,
    pub pressure_diff_stderr: f64,
    pub pressure_method: Estimator,
    pub agree: bool,
    /// Survivor mass underflowed; `direct` is reported as `+∞`.
    pub underflow: bool,
    pub depth: usize,
    /// Mean of `−log ν_c(X_{ω,k})` over the sampled orbits, `k = 0..=n`.
    pub neg_log_mass: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<LinearFit>,
}

/// `log ν_{ω,c}(X_{ω,k})` for `k = 0..=n`. At `t = 1` the closed measure is
/// Lebesgue and the survivor oracle is exact; otherwise
/// `ν_{ω,c}(X_{ω,k}) = ν_{σᵏω,c}(Lᵏ 1_ω) / Π_{j<k} λ_{σʲω,c}` on the grid.
fn log_masses(
    system: &RandomOpenSystem,
    tc: Option<&TransferCocycle>,
    orbit: &Orbit,
    n: usize,
    opts: &MonteCarloOptions,
) -> Result<Vec<f64>> {
    let Some(tc) = tc else {
        return (0..=n)
            .map(|k| Ok(survivor_intervals(system, orbit, 0, k)?.total_length().ln()))
            .collect();
    };
    let mut out = Vec::with_capacity(n + 1);
    let mut v = unit_on_fiber(tc, orbit.symbol(0)?, Openness::Open).into_values();
    let mut next = vec![0.0; v.len()];
    let mut log_scale = 0.0;
    let mut log_lambda_c = 0.0;
    for k in 0..=n as i64 {
        let nu = closed_conformal_eval(tc, orbit, k, &tc.function(v.clone())?, opts.lambda)?;
        out.push(if nu.value > 0.0 {
            nu.value.ln() + log_scale - log_lambda_c
        } else {
            f64::NEG_INFINITY
        });
        if k == n as i64 {
            break;
        }
        log_lambda_c += closed_lambda(tc, orbit, k, opts.lambda)?.value.ln();
        tc.step_slice(orbit, k, &v, &mut next, Openness::Open)?;
        let s = next.iter().cloned().fold(0.0, f64::max);
        if s == 0.0 {
            out.resize(n + 1, f64::NEG_INFINITY);
            return Ok(out);
        }
        next.iter_mut().for_each(|x| *x /= s);
        log_scale += s.ln();
        std::mem::swap(&mut v, &mut next);
    }
    Ok(out)
}

/// `EP` at the system's own potential, with standard error.
fn own_pressure(
    system: &RandomOpenSystem,
    method: Estimator,
    opts: MonteCarloOptions,
) -> Result<(f64, f64)> {
    if method == Estimator::Analytic {
        let t = system
            .potential()
            .geometric_t()
            .ok_or_else(|| Error::NotAnalytic("tabulated potential".into()))?;
        return Ok((analytic_pressure(system, t)?, 0.0));
    }
    let sampler = PressureSampler::new(system, None, method, opts)?;
    let vals: Vec<f64> = sampler
        .values(0..opts.orbits)?
        .into_iter()
        .map(|v| v.0)
        .collect();
    Ok(mean_stderr(&vals))
}

/// Escape rate by the direct survivor-mass slope and by `EP_c − EP`. The
/// pressure route is analytic whenever both the open and closed systems
/// allow it, and uses `estimator` otherwise.
pub fn escape_rate(
    system: &RandomOpenSystem,
    depth: usize,
    estimator: Estimator,
    opts: MonteCarloOptions,
) -> Result<EscapeReport> {
    opts.validate()?;
    if depth < 4 {
        return Err(Error::config("depth", "escape rate needs depth at least 4"));
    }
    let closed = system.closed();
    let pressure_method = if is_analytic(system) && is_analytic(&closed) {
        Estimator::Analytic
    } else if estimator == Estimator::Analytic {
        return Err(Error::NotAnalytic(
            "open or closed system is not analytic".into(),
        ));
    } else {
        estimator
    };
    let (ep, ep_se) = own_pressure(system, pressure_method, opts)?;
    let (ep_c, ep_c_se) = own_pressure(&closed, pressure_method, opts)?;
    let pressure_diff = ep_c - ep;
    let pressure_diff_stderr = ep_se.hypot(ep_c_se);

    let tc = if matches!(system.potential().geometric_t(), Some(t) if t == 1.0) {
        None
    } else {
        Some(TransferCocycle::with_resolution(system, opts.resolution)?)
    };
    debug_assert!(tc.as_ref().map_or(true, |tc| !closed_is_lebesgue(tc)));
    let window = depth + opts.lambda.n_max + 1;
    let per_orbit = (0..opts.orbits)
        .map(|k| {
            let orbit = system
                .driving()
                .sample_orbit(derive_seed(opts.seed, k as u64), 0, window);
            log_masses(system, tc.as_ref(), &orbit, depth, &opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let neg_log_mass: Vec<f64> = (0..=depth)
        .map(|j| -per_orbit.iter().map(|m| m[j]).sum::<f64>() / opts.orbits as f64)
        .collect();

    let start = depth / 2;
    if neg_log_mass[start..].iter().any(|y| !y.is_finite()) {
        return Ok(EscapeReport {
            direct: f64::INFINITY,
            direct_stderr: 0.0,
            pressure_diff,
            pressure_diff_stderr,
            pressure_method,
            agree: pressure_diff == f64::INFINITY,
            underflow: true,
            depth,
            neg_log_mass,
            fit: None,
        });
    }
    let xs: Vec<f64> = (start..=depth).map(|k| k as f64).collect();
    let fit = linear_fit(&xs, &neg_log_mass[start..])?;
    let tol = (2.0 * fit.slope_stderr.hypot(pressure_diff_stderr)).max(AGREE_FLOOR);
    Ok(EscapeReport {
        direct: fit.slope,
        direct_stderr: fit.slope_stderr,
        pressure_diff,
        pressure_diff_stderr,
        pressure_method,
        agree: (fit.slope - pressure_diff).abs() <= tol,
        underflow: false,
        depth,
        neg_log_mass,
        fit: Some(fit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};
    use crate::interval::IntervalSet;

    fn cantor(t: f64) -> RandomOpenSystem {
        build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            t,
            DrivingSystem::constant(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn cantor_escape_is_log_three_halves() {
        let opts = MonteCarloOptions {
            orbits: 1,
            resolution: 27,
            ..Default::default()
        };
        let r = escape_rate(&cantor(1.0), 20, Estimator::Sandwich, opts).unwrap();
        let exact = 1.5f64.ln();
        assert!((r.direct - exact).abs() < 1e-9, "{}", r.direct);
        assert!((r.pressure_diff - exact).abs() < 1e-12);
        assert!(r.agree && r.pressure_method == Estimator::Analytic);
    }

    #[test]
    fn grid_route_away_from_t_one() {
        // EP_c − EP = log 3 − log 2 for every t.
        let t = 0.5;
        let opts = MonteCarloOptions {
            orbits: 1,
            resolution: 81,
            ..Default::default()
        };
        let r = escape_rate(&cantor(t), 16, Estimator::Sandwich, opts).unwrap();
        let exact = (3f64.ln() * (1.0 - t)) - (2f64.ln() - t * 3f64.ln());
        assert!((r.pressure_diff - exact).abs() < 1e-12);
        assert!((r.direct - exact).abs() < 1e-8, "{} vs {exact}", r.direct);
    }
}
