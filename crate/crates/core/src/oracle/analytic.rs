use serde::Serialize;

use crate::cocycle::{Potential, RandomOpenSystem};
use crate::error::{Error, Result};

const WHOLE_TOL: f64 = 1e-12;

/// Surviving slopes per fiber when the system is full-branch affine with
/// holes made of whole branches and a geometric potential; `None` otherwise.
pub fn analytic_slopes(system: &RandomOpenSystem) -> Option<Vec<Vec<f64>>> {
    if !matches!(system.potential(), Potential::Geometric { .. }) {
        return None;
    }
    let mut out = Vec::with_capacity(system.alphabet_size());
    for fiber in system.fibers() {
        let hole = fiber.hole.intervals();
        let mut alive = Vec::new();
        let mut dead_length = 0.0;
        for b in fiber.map.branches() {
            let d = b.domain();
            let covered = hole.overlap_length(d.lo, d.hi);
            if covered <= WHOLE_TOL {
                if !b.is_full() {
                    return None;
                }
                alive.push(b.slope()?.abs());
            } else if covered >= d.length() - WHOLE_TOL {
                dead_length += d.length();
            } else {
                return None;
            }
        }
        if (hole.total_length() - dead_length).abs() > WHOLE_TOL {
            return None;
        }
        out.push(alive);
    }
    Some(out)
}

pub fn is_analytic(system: &RandomOpenSystem) -> bool {
    analytic_slopes(system).is_some()
}

fn slopes_or_err(system: &RandomOpenSystem) -> Result<Vec<Vec<f64>>> {
    analytic_slopes(system).ok_or_else(|| {
        Error::NotAnalytic(
            "analytic formulas need full affine surviving branches, whole-branch holes and a geometric potential"
                .into(),
        )
    })
}

fn pressure_from(slopes: &[Vec<f64>], marginal: &[f64], t: f64) -> Result<f64> {
    let mut ep = 0.0;
    for (s, alive) in slopes.iter().enumerate() {
        if marginal[s] == 0.0 {
            continue;
        }
        if alive.is_empty() {
            return Err(Error::DegenerateSystem(format!(
                "fiber {s} has no surviving branch"
            )));
        }
        let lam: f64 = alive.iter().map(|a| a.powf(-t)).sum();
        ep += marginal[s] * lam.ln();
    }
    Ok(ep)
}

/// `EP(t) = Σ_s m(s) log Σ_{b ∉ H_s} |slope_b|^{-t}`.
pub fn analytic_pressure(system: &RandomOpenSystem, t: f64) -> Result<f64> {
    let slopes = slopes_or_err(system)?;
    pressure_from(&slopes, system.driving().marginal(), t)
}

/// Per-fiber `λ_{s,t} = Σ_{b ∉ H_s} |slope_b|^{-t}`.
pub fn analytic_lambdas(system: &RandomOpenSystem, t: f64) -> Result<Vec<f64>> {
    Ok(slopes_or_err(system)?
        .iter()
        .map(|alive| alive.iter().map(|a| a.powf(-t)).sum())
        .collect())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AnalyticRoot {
    pub h: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub ep_lo: f64,
    pub ep_hi: f64,
}

/// Zero of `t ↦ EP(t)` on `[0, 1]` by bisection down to `tol`. A root at
/// an endpoint is reported with a degenerate bracket.
pub fn analytic_root(system: &RandomOpenSystem, tol: f64) -> Result<AnalyticRoot> {
    let slopes = slopes_or_err(system)?;
    let m = system.driving().marginal();
    let ep = |t: f64| pressure_from(&slopes, m, t);
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut elo, mut ehi) = (ep(lo)?, ep(hi)?);
    if elo <= 0.0 {
        return Ok(AnalyticRoot {
            h: 0.0,
            t_lo: 0.0,
            t_hi: 0.0,
            ep_lo: elo,
            ep_hi: elo,
        });
    }
    if ehi >= 0.0 {
        return Ok(AnalyticRoot {
            h: 1.0,
            t_lo: 1.0,
            t_hi: 1.0,
            ep_lo: ehi,
            ep_hi: ehi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let e = ep(mid)?;
        if e > 0.0 {
            lo = mid;
            elo = e;
        } else {
            hi = mid;
            ehi = e;
        }
    }
    Ok(AnalyticRoot {
        h: 0.5 * (lo + hi),
        t_lo: lo,
        t_hi: hi,
        ep_lo: elo,
        ep_hi: ehi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};
    use crate::interval::IntervalSet;

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
    fn cantor_pressure_and_root() {
        let sys = cantor();
        for t in [0.0, 0.5, 1.0] {
            let ep = analytic_pressure(&sys, t).unwrap();
            assert!((ep - (2f64.ln() - t * 3f64.ln())).abs() < 1e-14);
        }
        let r = analytic_root(&sys, 1e-12).unwrap();
        assert!((r.h - 2f64.ln() / 3f64.ln()).abs() < 1e-11);
        assert!(r.ep_lo > 0.0 && r.ep_hi <= 0.0);
    }

    #[test]
    fn random_beta_pressure() {
        let sys = build_beta_system(
            &[2.0, 4.0],
            &[
                IntervalSet::from_pairs(&[[0.5, 1.0]]),
                IntervalSet::from_pairs(&[[0.75, 1.0]]),
            ],
            1.0,
            DrivingSystem::iid(vec![0.5, 0.5]).unwrap(),
            true,
        )
        .unwrap();
        let ep = analytic_pressure(&sys, 0.3).unwrap();
        assert!((ep - (0.5 * 3f64.ln() - 1.5 * 0.3 * 2f64.ln())).abs() < 1e-14);
        let r = analytic_root(&sys, 1e-12).unwrap();
        assert!((r.h - 3f64.ln() / (3.0 * 2f64.ln())).abs() < 1e-11);
    }

    #[test]
    fn closed_normalized_is_zero() {
        let sys = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        assert!(analytic_pressure(&sys, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_partial_holes_and_nonfull_branches() {
        let partial = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[0.4, 0.6]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        assert!(matches!(
            analytic_pressure(&partial, 1.0),
            Err(Error::NotAnalytic(_))
        ));
        let b25 = build_beta_system(
            &[2.5],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        assert!(!is_analytic(&b25));
    }
}
