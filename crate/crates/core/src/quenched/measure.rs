use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::battery::TestFunction;
use super::density::{invariant_density, DensityEstimate};
use super::lambda::{conformal_eval, fiber_lambda, Estimate, LambdaOptions};
use crate::cocycle::{Orbit, Potential};
use crate::error::{Error, Result};
use crate::operator::{GridFunction, Openness, TransferCocycle};
use crate::oracle::survivor_intervals;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    NuOpen,
    NuClosed,
    Mu,
    Eta,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureEstimate {
    pub kind: MeasureKind,
    pub position: i64,
    pub entries: BTreeMap<String, Estimate>,
}

/// Whether the closed conformal measure is Lebesgue (`t = 1`, `λ_c = 1`).
pub fn closed_is_lebesgue(tc: &TransferCocycle) -> bool {
    matches!(tc.system().potential(), Potential::Geometric { t } if *t == 1.0)
}

/// `ν_{σ^p ω, c}(f)`: the Lebesgue integral at `t = 1`, the closed-cocycle
/// functional otherwise.
pub fn closed_conformal_eval(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    f: &GridFunction,
    opts: LambdaOptions,
) -> Result<Estimate> {
    if closed_is_lebesgue(tc) {
        Ok(Estimate::exact(f.integral()))
    } else {
        conformal_eval(tc, orbit, p, f, opts, Openness::Closed)
    }
}

/// `λ_{σ^p ω, c}`.
pub fn closed_lambda(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    opts: LambdaOptions,
) -> Result<Estimate> {
    if closed_is_lebesgue(tc) {
        Ok(Estimate::exact(1.0))
    } else {
        Ok((&fiber_lambda(tc, orbit, p, opts, Openness::Closed)?).into())
    }
}

/// `μ_ω = q_ω ν_ω` at one orbit position, with `ν_ω(q_ω)` cached.
#[derive(Clone, Debug)]
pub struct InvariantMeasure<'a> {
    tc: &'a TransferCocycle,
    orbit: &'a Orbit,
    position: i64,
    opts: LambdaOptions,
    pub density: DensityEstimate,
    pub nu_q: Estimate,
}

impl<'a> InvariantMeasure<'a> {
    pub fn new(
        tc: &'a TransferCocycle,
        orbit: &'a Orbit,
        p: i64,
        depth: usize,
        opts: LambdaOptions,
    ) -> Result<Self> {
        let density = invariant_density(tc, orbit, p, depth, opts)?;
        let nu_q = conformal_eval(tc, orbit, p, &density.q, opts, Openness::Open)?;
        Ok(InvariantMeasure {
            tc,
            orbit,
            position: p,
            opts,
            density,
            nu_q,
        })
    }

    /// `μ_ω(f) = ν_ω(f q_ω) / ν_ω(q_ω)`.
    pub fn eval(&self, f: &GridFunction) -> Result<Estimate> {
        let fq = f.mul(&self.density.q)?;
        let num = conformal_eval(
            self.tc,
            self.orbit,
            self.position,
            &fq,
            self.opts,
            Openness::Open,
        )?;
        Estimate::ratio(num, self.nu_q)
    }
}

pub fn invariant_measure_eval(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    f: &GridFunction,
    depth: usize,
    opts: LambdaOptions,
) -> Result<Estimate> {
    InvariantMeasure::new(tc, orbit, p, depth, opts)?.eval(f)
}

/// The RACCIM `η_ω = 1_ω h_ω ν_{ω,c}` at one orbit position.
#[derive(Clone, Debug)]
pub struct Raccim<'a> {
    tc: &'a TransferCocycle,
    orbit: &'a Orbit,
    position: i64,
    opts: LambdaOptions,
    /// `1_ω q_ω`.
    weighted: GridFunction,
    /// `ν_{ω,c}(1_ω q_ω)`.
    pub mass: Estimate,
    pub alpha: Estimate,
    pub lambda_closed: Estimate,
    /// `sup_{I_{σω}} |L_ω h_ω − λ_{ω,c} α_ω h_{σω}|` with `h = q / ν_c(1 q)`.
    pub residual: f64,
}

impl<'a> Raccim<'a> {
    pub fn new(
        tc: &'a TransferCocycle,
        orbit: &'a Orbit,
        p: i64,
        depth: usize,
        opts: LambdaOptions,
    ) -> Result<Self> {
        let here = invariant_density(tc, orbit, p, depth, opts)?;
        let next = invariant_density(tc, orbit, p + 1, depth + 1, opts)?;
        let sym = orbit.symbol(p)?;
        let nsym = orbit.symbol(p + 1)?;
        let weighted = here.q.mul(tc.survivor_indicator(sym))?;
        let mass = closed_conformal_eval(tc, orbit, p, &weighted, opts)?;
        let x1 = GridFunction::indicator(
            tc.grid().clone(),
            &survivor_intervals(tc.system(), orbit, p, 1)?,
        );
        let alpha = Estimate::ratio(
            closed_conformal_eval(tc, orbit, p, &weighted.mul(&x1)?, opts)?,
            mass,
        )?;
        let lambda_closed = closed_lambda(tc, orbit, p, opts)?;

        let next_weighted = next.q.mul(tc.survivor_indicator(nsym))?;
        let next_mass = closed_conformal_eval(tc, orbit, p + 1, &next_weighted, opts)?;
        let lhs = tc
            .matrix(sym, Openness::Open)
            .apply(&weighted)?
            .scale(1.0 / mass.value);
        let rhs = next
            .q
            .scale(lambda_closed.value * alpha.value / next_mass.value);
        let mask = tc.survivor_indicator(nsym);
        let residual = lhs
            .values()
            .iter()
            .zip(rhs.values())
            .zip(mask.values())
            .filter(|(_, &m)| m > 0.0)
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(Raccim {
            tc,
            orbit,
            position: p,
            opts,
            weighted,
            mass,
            alpha,
            lambda_closed,
            residual,
        })
    }

    /// `η_ω(f) = ν_{ω,c}(1_ω q_ω f) / ν_{ω,c}(1_ω q_ω)`.
    pub fn eval(&self, f: &GridFunction) -> Result<Estimate> {
        let num = closed_conformal_eval(
            self.tc,
            self.orbit,
            self.position,
            &self.weighted.mul(f)?,
            self.opts,
        )?;
        Estimate::ratio(num, self.mass)
    }
}

pub fn raccim_eval(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    f: &GridFunction,
    depth: usize,
    opts: LambdaOptions,
) -> Result<Estimate> {
    Raccim::new(tc, orbit, p, depth, opts)?.eval(f)
}

/// Evaluates one measure kind on every function of a battery.
pub fn measure_battery(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    kind: MeasureKind,
    battery: &[TestFunction],
    depth: usize,
    opts: LambdaOptions,
) -> Result<MeasureEstimate> {
    let grid = tc.grid();
    let fs = battery.iter().map(|f| (f.id(), f.on_grid(grid)));
    let entries = match kind {
        MeasureKind::NuOpen | MeasureKind::NuClosed => {
            let openness = if kind == MeasureKind::NuOpen {
                Openness::Open
            } else {
                Openness::Closed
            };
            fs.map(|(id, g)| Ok((id, conformal_eval(tc, orbit, p, &g, opts, openness)?)))
                .collect::<Result<_>>()?
        }
        MeasureKind::Mu => {
            let mu = InvariantMeasure::new(tc, orbit, p, depth, opts)?;
            fs.map(|(id, g)| Ok((id, mu.eval(&g)?)))
                .collect::<Result<_>>()?
        }
        MeasureKind::Eta => {
            let eta = Raccim::new(tc, orbit, p, depth, opts)?;
            fs.map(|(id, g)| Ok((id, eta.eval(&g)?)))
                .collect::<Result<_>>()?
        }
    };
    if battery.is_empty() {
        return Err(Error::config("battery", "no test functions given"));
    }
    Ok(MeasureEstimate {
        kind,
        position: p,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem, RandomOpenSystem};
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
    fn cantor_measures() {
        let tc = TransferCocycle::with_resolution(&cantor(), 81).unwrap();
        let orbit = Orbit::periodic(&[0], 30, 80);
        let opts = LambdaOptions {
            n_max: 60,
            tol: 1e-10,
        };
        let left = GridFunction::indicator(
            tc.grid().clone(),
            &IntervalSet::from_pairs(&[[0.0, 1.0 / 3.0]]),
        );

        let mu = InvariantMeasure::new(&tc, &orbit, 0, 10, opts).unwrap();
        let one = mu.eval(&tc.one()).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
        let c = mu.eval(&tc.one().scale(3.5)).unwrap();
        assert!((c.value - 3.5).abs() < 1e-12);
        let l = mu.eval(&left).unwrap();
        assert!((l.value - 0.5).abs() <= 1e-9 + l.error, "{l:?}");

        let eta = Raccim::new(&tc, &orbit, 0, 10, opts).unwrap();
        assert!((eta.eval(&tc.one()).unwrap().value - 1.0).abs() < 1e-12);
        assert!((eta.eval(&left).unwrap().value - 0.5).abs() < 1e-12);
        assert!((eta.alpha.value - 2.0 / 3.0).abs() < 1e-12);
        assert!(eta.residual < 1e-12, "{}", eta.residual);
    }

    #[test]
    fn doubling_closed_ramp_integral() {
        let sys = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 64).unwrap();
        let orbit = Orbit::periodic(&[0], 5, 100);
        let ramp = TestFunction::Ramp.on_grid(tc.grid());
        let est = conformal_eval(
            &tc,
            &orbit,
            0,
            &ramp,
            LambdaOptions::default(),
            Openness::Closed,
        )
        .unwrap();
        assert!((est.value - 0.5).abs() < 1.0 / 64.0 + est.error, "{est:?}");
    }

    #[test]
    fn battery_report_keys() {
        let tc = TransferCocycle::with_resolution(&cantor(), 27).unwrap();
        let orbit = Orbit::periodic(&[0], 20, 60);
        let battery = vec![
            TestFunction::Constant(1.0),
            TestFunction::Indicator([0.0, 0.5]),
        ];
        let rep = measure_battery(
            &tc,
            &orbit,
            0,
            MeasureKind::NuOpen,
            &battery,
            8,
            LambdaOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.entries.len(), 2);
        assert!((rep.entries["constant(1)"].value - 1.0).abs() < 1e-14);
    }
}
