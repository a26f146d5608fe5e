use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{derive_seed, Orbit, RandomOpenSystem};
use crate::error::{Error, Result};
use crate::operator::{Openness, TransferCocycle};
use crate::oracle::analytic_pressure;
use crate::quenched::{fiber_lambda, unit_on_fiber, LambdaOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "sup_inf_sandwich", alias = "sandwich")]
    Sandwich,
    #[serde(rename = "lambda_product", alias = "lambda")]
    LambdaProduct,
    #[serde(rename = "analytic")]
    Analytic,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Sandwich => "sup_inf_sandwich",
            Estimator::LambdaProduct => "lambda_product",
            Estimator::Analytic => "analytic",
        }
    }
}

/// Orbit sampling parameters shared by the Monte Carlo estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloOptions {
    pub orbits: usize,
    pub depth: usize,
    pub resolution: usize,
    pub seed: u64,
    #[serde(default)]
    pub lambda: LambdaOptions,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        MonteCarloOptions {
            orbits: 64,
            depth: 30,
            resolution: 256,
            seed: 0,
            lambda: LambdaOptions::default(),
        }
    }
}

impl MonteCarloOptions {
    pub fn validate(&self) -> Result<()> {
        if self.orbits == 0 {
            return Err(Error::config("orbits", "need at least one orbit"));
        }
        if self.depth == 0 {
            return Err(Error::config("depth", "need depth at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureSample {
    pub t: f64,
    pub ep: f64,
    pub stderr: f64,
    pub estimator: Estimator,
    pub depth: usize,
    pub per_orbit: Vec<f64>,
    /// Mean of `(1/n)(log sup − log inf)` of `Lⁿ1`; sandwich estimator only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sandwich_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureCurve {
    pub estimator: Estimator,
    pub samples: Vec<PressureSample>,
}

/// Mean and standard error (sample standard deviation over `√K`).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// `((1/n) log inf, (1/n) log sup)` of `Lⁿ1_ω` over its support.
pub fn sandwich_bounds(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    n: usize,
) -> Result<(f64, f64)> {
    let mut v = unit_on_fiber(tc, orbit.symbol(p)?, Openness::Open).into_values();
    let mut next = vec![0.0; v.len()];
    let mut log_scale = 0.0;
    for j in 0..n as i64 {
        tc.step_slice(orbit, p + j, &v, &mut next, Openness::Open)?;
        let s = next.iter().cloned().fold(0.0, f64::max);
        if s == 0.0 {
            return Err(Error::DegenerateSystem(format!(
                "L^n 1 vanished at orbit position {}",
                p + j + 1
            )));
        }
        for x in &mut next {
            *x /= s;
        }
        log_scale += s.ln();
        std::mem::swap(&mut v, &mut next);
    }
    let (inf, sup) = v
        .iter()
        .filter(|&&x| x > 0.0)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let n = n as f64;
    Ok(((log_scale + inf.ln()) / n, (log_scale + sup.ln()) / n))
}

/// `(1/n) Σ_j log λ_{σ^j ω}` with each multiplier from its Λ bracket.
pub fn lambda_product(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    n: usize,
    opts: LambdaOptions,
) -> Result<f64> {
    let mut acc = 0.0;
    for j in 0..n as i64 {
        let l = fiber_lambda(tc, orbit, p + j, opts, Openness::Open)?;
        if l.value <= 0.0 {
            return Err(Error::DegenerateSystem(format!(
                "λ vanished at orbit position {}",
                p + j
            )));
        }
        acc += l.value.ln();
    }
    Ok(acc / n as f64)
}

/// Per-orbit pressure values at a fixed `t`, evaluated on demand so that
/// callers can extend the sample without recomputing it.
pub struct PressureSampler {
    system: RandomOpenSystem,
    tc: TransferCocycle,
    estimator: Estimator,
    opts: MonteCarloOptions,
}

impl PressureSampler {
    pub fn new(
        system: &RandomOpenSystem,
        t: Option<f64>,
        estimator: Estimator,
        opts: MonteCarloOptions,
    ) -> Result<Self> {
        opts.validate()?;
        if estimator == Estimator::Analytic {
            return Err(Error::config(
                "estimator",
                "the analytic estimator takes no samples",
            ));
        }
        let system = match t {
            Some(t) => system.with_t(t)?,
            None => system.clone(),
        };
        let tc = TransferCocycle::with_resolution(&system, opts.resolution)?;
        Ok(PressureSampler {
            system,
            tc,
            estimator,
            opts,
        })
    }

    pub fn orbit(&self, k: usize) -> Orbit {
        let extra = match self.estimator {
            Estimator::LambdaProduct => self.opts.lambda.n_max + 1,
            _ => 0,
        };
        self.system.driving().sample_orbit(
            derive_seed(self.opts.seed, k as u64),
            0,
            self.opts.depth + extra,
        )
    }

    /// Values for orbits `range`, plus sandwich gaps when applicable.
    pub fn values(&self, range: std::ops::Range<usize>) -> Result<Vec<(f64, Option<f64>)>> {
        range
            .into_par_iter()
            .map(|k| {
                let orbit = self.orbit(k);
                match self.estimator {
                    Estimator::Sandwich => {
                        let (lo, hi) = sandwich_bounds(&self.tc, &orbit, 0, self.opts.depth)?;
                        Ok((0.5 * (lo + hi), Some(hi - lo)))
                    }
                    _ => Ok((
                        lambda_product(&self.tc, &orbit, 0, self.opts.depth, self.opts.lambda)?,
                        None,
                    )),
                }
            })
            .collect()
    }
}

/// `EP(t)` by the chosen estimator. Monte Carlo estimators average over
/// `opts.orbits` independent orbits.
pub fn expected_pressure(
    system: &RandomOpenSystem,
    t: f64,
    estimator: Estimator,
    opts: MonteCarloOptions,
) -> Result<PressureSample> {
    if estimator == Estimator::Analytic {
        let ep = analytic_pressure(system, t)?;
        return Ok(PressureSample {
            t,
            ep,
            stderr: 0.0,
            estimator,
            depth: 0,
            per_orbit: Vec::new(),
            sandwich_gap: None,
        });
    }
    let sampler = PressureSampler::new(system, Some(t), estimator, opts)?;
    let vals = sampler.values(0..opts.orbits)?;
    let per_orbit: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let (ep, stderr) = mean_stderr(&per_orbit);
    let sandwich_gap = (estimator == Estimator::Sandwich)
        .then(|| vals.iter().map(|v| v.1.unwrap_or(0.0)).sum::<f64>() / vals.len() as f64);
    Ok(PressureSample {
        t,
        ep,
        stderr,
        estimator,
        depth: opts.depth,
        per_orbit,
        sandwich_gap,
    })
}

pub fn pressure_curve(
    system: &RandomOpenSystem,
    ts: &[f64],
    estimator: Estimator,
    opts: MonteCarloOptions,
) -> Result<PressureCurve> {
    if ts.is_empty() {
        return Err(Error::config("t_grid", "at least one t value is required"));
    }
    let samples = ts
        .iter()
        .map(|&t| expected_pressure(system, t, estimator, opts))
        .collect::<Result<_>>()?;
    Ok(PressureCurve { estimator, samples })
}

pub fn write_pressure_csv(curve: &PressureCurve, w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "ep", "stderr", "n", "estimator"])?;
    for s in &curve.samples {
        wr.write_record(&[
            format!("{:.17e}", s.t),
            format!("{:.17e}", s.ep),
            format!("{:.17e}", s.stderr),
            s.depth.to_string(),
            s.estimator.name().to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
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
    fn analytic_examples() {
        let sys = cantor();
        let s = expected_pressure(&sys, 1.0, Estimator::Analytic, MonteCarloOptions::default())
            .unwrap();
        assert!((s.ep - (2.0f64 / 3.0).ln()).abs() < 1e-15);
        let s = expected_pressure(&sys, 0.0, Estimator::Analytic, MonteCarloOptions::default())
            .unwrap();
        assert!((s.ep - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_matches_analytic_on_cantor() {
        let sys = cantor();
        let opts = MonteCarloOptions {
            orbits: 4,
            depth: 20,
            resolution: 81,
            seed: 3,
            lambda: LambdaOptions::default(),
        };
        for est in [Estimator::Sandwich, Estimator::LambdaProduct] {
            let s = expected_pressure(&sys, 0.5, est, opts).unwrap();
            let exact = 2f64.ln() - 0.5 * 3f64.ln();
            assert!((s.ep - exact).abs() < 1e-12, "{est:?} {}", s.ep);
        }
    }

    #[test]
    fn closed_doubling_is_zero() {
        let sys = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let opts = MonteCarloOptions {
            orbits: 2,
            depth: 10,
            resolution: 32,
            ..Default::default()
        };
        let s = expected_pressure(&sys, 1.0, Estimator::Sandwich, opts).unwrap();
        assert!(s.ep.abs() < 1e-14);
    }

    #[test]
    fn empty_t_grid() {
        let r = pressure_curve(
            &cantor(),
            &[],
            Estimator::Analytic,
            MonteCarloOptions::default(),
        );
        assert!(matches!(r, Err(Error::Config { .. })));
    }
}
