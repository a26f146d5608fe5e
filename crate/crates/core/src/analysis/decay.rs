use std::io::Write;

use serde::{Deserialize, Serialize};

use super::fit::{linear_fit, LinearFit};
use crate::cocycle::Orbit;
use crate::error::{Error, Result};
use crate::operator::{GridFunction, Openness, TransferCocycle};
use crate::quenched::{
    conformal_eval, functional_lambda, unit_on_fiber, Estimate, LambdaOptions, TestFunction,
};

/// First iterate used in the fit.
pub const BURN_IN: usize = 3;
/// Floating-point floor below which `C_k` is not trusted.
pub const ABSOLUTE_FLOOR: f64 = 1e-14;
/// Minimum `R²` for a fitted rate to count.
pub const MIN_R_SQUARED: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayOptions {
    /// Forward depth `n`.
    pub depth: usize,
    /// Backward depth used for every density `q_{σᵏω}`.
    pub backward: usize,
    #[serde(default = "tight_lambda")]
    pub lambda: LambdaOptions,
    /// Also compute correlation-form residuals (three extra Λ calls per step).
    #[serde(default)]
    pub correlations: bool,
}

fn tight_lambda() -> LambdaOptions {
    LambdaOptions {
        n_max: 400,
        tol: 1e-14,
    }
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            depth: 30,
            backward: 30,
            lambda: tight_lambda(),
            correlations: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecaySeries {
    pub test_fn: String,
    /// `C_k` for `k = 0..=n`.
    pub c: Vec<f64>,
    /// Error floor for each `C_k` from the Λ brackets involved.
    pub floor: Vec<f64>,
    /// Fitted range `[3, k_end)`, truncated at the first `C_k` under its floor.
    pub fit_range: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<LinearFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Every `C_k` past burn-in sits under the floor.
    pub exact: bool,
    pub inconclusive: bool,
    /// `|ν_{σᵏω}(f·Lᵏ(f q_ω)/λᵏ) − μ_{σᵏω}(f) μ_ω(f)|` when requested.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub correlation: Vec<f64>,
}

impl DecaySeries {
    /// Either exact, or a genuine contraction with a good fit.
    pub fn passes(&self) -> bool {
        self.exact || (!self.inconclusive && self.kappa.is_some_and(|k| k > 0.0 && k < 1.0))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PooledFit {
    pub kappa: f64,
    pub r_squared: f64,
    pub series: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub position: i64,
    pub depth: usize,
    pub backward: usize,
    pub series: Vec<DecaySeries>,
    /// Common slope over the non-exact series, each with its own intercept.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pooled: Option<PooledFit>,
}

/// `Lᵏ_{σ^p ω}` applied step by step, renormalized by a shared scale so the
/// ratio to the companion `Lᵏ1` survives underflow.
struct Pushforward<'a> {
    tc: &'a TransferCocycle,
    orbit: &'a Orbit,
    pos: i64,
    vals: Vec<Vec<f64>>,
    scratch: Vec<f64>,
}

impl<'a> Pushforward<'a> {
    fn new(tc: &'a TransferCocycle, orbit: &'a Orbit, p: i64, vals: Vec<Vec<f64>>) -> Self {
        let n = tc.dim();
        Pushforward {
            tc,
            orbit,
            pos: p,
            vals,
            scratch: vec![0.0; n],
        }
    }

    /// One step; the first vector sets the scale.
    fn step(&mut self) -> Result<()> {
        let mut scale = 0.0;
        for (i, v) in self.vals.iter_mut().enumerate() {
            self.tc
                .step_slice(self.orbit, self.pos, v, &mut self.scratch, Openness::Open)?;
            std::mem::swap(v, &mut self.scratch);
            if i == 0 {
                scale = v.iter().cloned().fold(0.0, f64::max);
                if scale == 0.0 {
                    return Err(Error::DegenerateSystem(format!(
                        "L^n 1 vanished at orbit position {}",
                        self.pos + 1
                    )));
                }
            }
            v.iter_mut().for_each(|x| *x /= scale);
        }
        self.pos += 1;
        Ok(())
    }
}

fn relative(e: &crate::quenched::LambdaEstimate) -> Result<f64> {
    if e.lo <= 0.0 {
        return Err(Error::DegenerateSystem(format!(
            "Λ bracket [{}, {}] touches zero",
            e.lo, e.hi
        )));
    }
    Ok(e.error / e.lo)
}

/// `C_k = ‖Lᵏf / Λ_{σᵏω}(Lᵏ1_ω) − ν_ω(f) q_{σᵏω}‖_∞` for each test function,
/// with a log-linear fit over `k ∈ [3, n]`.
pub fn decay_fit(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    battery: &[TestFunction],
    opts: DecayOptions,
) -> Result<DecayReport> {
    let n = opts.depth;
    if n < BURN_IN + 2 {
        return Err(Error::config(
            "depth",
            format!("decay fit needs depth at least {}", BURN_IN + 2),
        ));
    }
    if opts.backward == 0 {
        return Err(Error::config(
            "backward",
            "backward depth must be at least 1",
        ));
    }
    if battery.is_empty() {
        return Err(Error::config(
            "battery",
            "at least one test function is required",
        ));
    }
    orbit.check_range(p - opts.backward as i64, p + n as i64)?;
    let grid = tc.grid();
    let fs: Vec<GridFunction> = battery.iter().map(|f| f.on_grid(grid)).collect();
    let nu_f: Vec<Estimate> = fs
        .iter()
        .map(|f| conformal_eval(tc, orbit, p, f, opts.lambda, Openness::Open))
        .collect::<Result<_>>()?;

    // Density chain from the common backward start p − D.
    let start = p - opts.backward as i64;
    let mut dens = Pushforward::new(
        tc,
        orbit,
        start,
        vec![unit_on_fiber(tc, orbit.symbol(start)?, Openness::Open).into_values()],
    );
    for _ in 0..opts.backward {
        dens.step()?;
    }
    let q_of = |d: &Pushforward| -> Result<(GridFunction, f64)> {
        let w = tc.function(d.vals[0].clone())?;
        let lam = functional_lambda(tc, orbit, d.pos, &w, opts.lambda, Openness::Open)?;
        Ok((w.scale(1.0 / lam.value), relative(&lam)?))
    };
    let (q0, _) = q_of(&dens)?;

    // Forward chain: Lᵏ1_ω, then every Lᵏf, then every Lᵏ(f q_ω).
    let mut init = vec![unit_on_fiber(tc, orbit.symbol(p)?, Openness::Open).into_values()];
    init.extend(fs.iter().map(|f| f.values().to_vec()));
    let mu0: Vec<Estimate> = if opts.correlations {
        let mut out = Vec::with_capacity(fs.len());
        for f in &fs {
            let fq = f.mul(&q0)?;
            out.push(conformal_eval(
                tc,
                orbit,
                p,
                &fq,
                opts.lambda,
                Openness::Open,
            )?);
            init.push(fq.into_values());
        }
        out
    } else {
        Vec::new()
    };
    let mut fwd = Pushforward::new(tc, orbit, p, init);
    let m = fs.len();
    let mut c = vec![Vec::with_capacity(n + 1); m];
    let mut floor = vec![Vec::with_capacity(n + 1); m];
    let mut corr = vec![Vec::new(); m];
    for k in 0..=n {
        if k > 0 {
            fwd.step()?;
            dens.step()?;
        }
        let (q, q_rel) = q_of(&dens)?;
        let q_sup = q.sup_norm();
        let ones = tc.function(fwd.vals[0].clone())?;
        let lam = functional_lambda(tc, orbit, p + k as i64, &ones, opts.lambda, Openness::Open)?;
        let lam_rel = relative(&lam)?;
        for j in 0..m {
            let u: Vec<f64> = fwd.vals[1 + j].iter().map(|x| x / lam.value).collect();
            let nf = nu_f[j];
            let ck = u
                .iter()
                .zip(q.values())
                .map(|(a, b)| (a - nf.value * b).abs())
                .fold(0.0, f64::max);
            let u_sup = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            c[j].push(ck);
            floor[j].push(
                ABSOLUTE_FLOOR
                    .max(lam_rel * u_sup + nf.value.abs() * q_sup * q_rel + nf.error * q_sup),
            );
            if opts.correlations {
                let h = tc.function(fwd.vals[1 + m + j].iter().map(|x| x / lam.value).collect())?;
                let lhs = conformal_eval(
                    tc,
                    orbit,
                    p + k as i64,
                    &fs[j].mul(&h)?,
                    opts.lambda,
                    Openness::Open,
                )?;
                let mu_k = conformal_eval(
                    tc,
                    orbit,
                    p + k as i64,
                    &fs[j].mul(&q)?,
                    opts.lambda,
                    Openness::Open,
                )?;
                corr[j].push((lhs.value - mu_k.value * mu0[j].value).abs());
            }
        }
    }

    let mut series = Vec::with_capacity(m);
    let mut pooled = (0.0, 0.0, 0.0, 0.0, 0usize);
    for (j, tf) in battery.iter().enumerate() {
        let end = (BURN_IN..=n)
            .find(|&k| c[j][k] < floor[j][k])
            .unwrap_or(n + 1);
        let exact = end == BURN_IN;
        let (fit, kappa) = if end - BURN_IN >= 3 {
            let xs: Vec<f64> = (BURN_IN..end).map(|k| k as f64).collect();
            let ys: Vec<f64> = (BURN_IN..end).map(|k| c[j][k].ln()).collect();
            let fit = linear_fit(&xs, &ys)?;
            let mx = xs.iter().sum::<f64>() / xs.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            pooled.0 += xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (x - mx) * (y - my))
                .sum::<f64>();
            pooled.1 += xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
            pooled.2 += ys.iter().map(|y| (y - my).powi(2)).sum::<f64>();
            pooled.4 += 1;
            (Some(fit), Some(fit.slope.exp()))
        } else {
            (None, None)
        };
        let inconclusive =
            !exact && !fit.is_some_and(|f| f.slope < 0.0 && f.r_squared >= MIN_R_SQUARED);
        series.push(DecaySeries {
            test_fn: tf.id(),
            c: std::mem::take(&mut c[j]),
            floor: std::mem::take(&mut floor[j]),
            fit_range: [BURN_IN, end],
            fit,
            kappa,
            exact,
            inconclusive,
            correlation: std::mem::take(&mut corr[j]),
        });
    }
    // Pooled residual sum of squares: Syy − Sxy²/Sxx summed over series.
    let pooled = (pooled.4 > 0 && pooled.1 > 0.0).then(|| {
        let slope = pooled.0 / pooled.1;
        let ssr = pooled.2 - pooled.0 * slope;
        PooledFit {
            kappa: slope.exp(),
            r_squared: if pooled.2 == 0.0 {
                1.0
            } else {
                (1.0 - ssr / pooled.2).max(0.0)
            },
            series: pooled.4,
        }
    });
    Ok(DecayReport {
        position: p,
        depth: n,
        backward: opts.backward,
        series,
        pooled,
    })
}

/// Writes `n,test_fn,c_n` rows.
pub fn write_decay_csv(report: &DecayReport, w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "test_fn", "c_n"])?;
    for s in &report.series {
        for (k, v) in s.c.iter().enumerate() {
            wr.write_record(&[k.to_string(), s.test_fn.clone(), format!("{v:.17e}")])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};
    use crate::interval::IntervalSet;

    fn cantor_tc(n: usize) -> TransferCocycle {
        let sys = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        TransferCocycle::with_resolution(&sys, n).unwrap()
    }

    #[test]
    fn constants_are_exact() {
        let tc = cantor_tc(100);
        let orbit = Orbit::periodic(&[0], 40, 40);
        let opts = DecayOptions {
            depth: 12,
            backward: 12,
            ..Default::default()
        };
        let r = decay_fit(
            &tc,
            &orbit,
            0,
            &[TestFunction::Constant(1.0), TestFunction::Constant(2.5)],
            opts,
        )
        .unwrap();
        for s in &r.series {
            assert!(s.exact && s.passes(), "{:?}", s.c);
        }
    }

    #[test]
    fn indicator_decays() {
        let tc = cantor_tc(100);
        let orbit = Orbit::periodic(&[0], 80, 80);
        let opts = DecayOptions {
            depth: 30,
            backward: 30,
            correlations: true,
            ..Default::default()
        };
        let r = decay_fit(
            &tc,
            &orbit,
            0,
            &[TestFunction::Indicator([0.0, 1.0 / 3.0])],
            opts,
        )
        .unwrap();
        let s = &r.series[0];
        assert!(s.passes(), "{:?}", s);
        assert!(s.c[30] < 1e-8, "{}", s.c[30]);
        assert_eq!(s.correlation.len(), 31);
        let mut csv = Vec::new();
        write_decay_csv(&r, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 32);
    }
}
