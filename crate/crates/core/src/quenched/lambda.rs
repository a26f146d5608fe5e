use serde::{Deserialize, Serialize};

use crate::cocycle::Orbit;
use crate::error::{Error, Result};
use crate::operator::{GridFunction, Openness, TransferCocycle};

/// Relative slack allowed in the monotonicity check on ratio brackets.
const MONOTONE_SLACK: f64 = 1e-10;

/// Iteration budget for the ratio brackets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaOptions {
    pub n_max: usize,
    pub tol: f64,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            n_max: 400,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioRecord {
    pub n: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub support: usize,
}

/// `inf / sup` over `D_{σⁿω,n}` of `Lⁿf / Lⁿ1_ω`, one record per iterate.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RatioSequence {
    pub records: Vec<RatioRecord>,
}

impl RatioSequence {
    pub fn last(&self) -> Option<&RatioRecord> {
        self.records.last()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaEstimate {
    pub value: f64,
    pub error: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
    /// One sequence for nonnegative input, two (positive, negative part)
    /// for signed input.
    pub sequences: Vec<RatioSequence>,
}

impl LambdaEstimate {
    fn from_bracket(lo: f64, hi: f64, seq: RatioSequence) -> Self {
        let iterations = seq.last().map_or(0, |r| r.n);
        LambdaEstimate {
            value: 0.5 * (lo + hi),
            error: hi - lo,
            lo,
            hi,
            iterations,
            sequences: vec![seq],
        }
    }
}

/// A value with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    /// `a / b` with first-order interval propagation; the denominator
    /// bracket must stay positive.
    pub fn ratio(a: Estimate, b: Estimate) -> Result<Estimate> {
        let lo = b.value - b.error;
        if lo <= 0.0 {
            return Err(Error::Numerics(format!(
                "denominator bracket {} ± {} reaches zero",
                b.value, b.error
            )));
        }
        let value = a.value / b.value;
        Ok(Estimate {
            value,
            error: (a.error + value.abs() * b.error) / lo,
        })
    }
}

impl From<&LambdaEstimate> for Estimate {
    fn from(l: &LambdaEstimate) -> Self {
        Estimate {
            value: l.value,
            error: l.error,
        }
    }
}

/// `1_ω` on the grid, or `1` for the closed cocycle.
pub fn unit_on_fiber(tc: &TransferCocycle, symbol: usize, openness: Openness) -> GridFunction {
    match openness {
        Openness::Open => tc.survivor_indicator(symbol).clone(),
        Openness::Closed => tc.one(),
    }
}

fn ratio_bounds(u: &[f64], v: &[f64]) -> Option<(f64, f64, usize)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut count = 0;
    for (&a, &b) in u.iter().zip(v) {
        if b > 0.0 {
            let r = a / b;
            lo = lo.min(r);
            hi = hi.max(r);
            count += 1;
        }
    }
    (count > 0).then_some((lo, hi, count))
}

fn nonnegative_lambda(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    f: &[f64],
    opts: LambdaOptions,
    openness: Openness,
) -> Result<LambdaEstimate> {
    let sym = orbit.symbol(p)?;
    let mut u = f.to_vec();
    let mut v = unit_on_fiber(tc, sym, openness).into_values();
    // The forward window caps the iteration count.
    let n_max = opts.n_max.min((orbit.max_index() - p + 1).max(0) as usize);
    let mut seq = RatioSequence::default();
    let mut nu = vec![0.0; u.len()];
    let mut nv = vec![0.0; v.len()];
    let mut n = 0;
    loop {
        let (lo, hi, support) = ratio_bounds(&u, &v).ok_or_else(|| {
            Error::DegenerateSystem(format!(
                "support of L^{n} 1 died at orbit position {}",
                p + n as i64
            ))
        })?;
        if let Some(prev) = seq.last() {
            let slack = MONOTONE_SLACK * prev.max_ratio.abs().max(1e-300);
            if lo < prev.min_ratio - slack || hi > prev.max_ratio + slack {
                return Err(Error::Numerics(format!(
                    "ratio bracket widened at n = {n}: [{lo}, {hi}] vs [{}, {}]",
                    prev.min_ratio, prev.max_ratio
                )));
            }
        }
        // Clip to the previous bracket; discrete brackets nest, so this only
        // removes rounding.
        let (lo, hi) = match seq.last() {
            Some(prev) => (
                lo.max(prev.min_ratio),
                hi.min(prev.max_ratio).max(lo.max(prev.min_ratio)),
            ),
            None => (lo, hi),
        };
        seq.records.push(RatioRecord {
            n,
            min_ratio: lo,
            max_ratio: hi,
            support,
        });
        if hi - lo <= opts.tol || n >= n_max {
            return Ok(LambdaEstimate::from_bracket(lo, hi, seq));
        }
        tc.step_slice(orbit, p + n as i64, &u, &mut nu, openness)?;
        tc.step_slice(orbit, p + n as i64, &v, &mut nv, openness)?;
        let scale = nv.iter().cloned().fold(0.0, f64::max);
        if scale > 0.0 {
            for (a, b) in nu.iter_mut().zip(nv.iter_mut()) {
                *a /= scale;
                *b /= scale;
            }
        }
        std::mem::swap(&mut u, &mut nu);
        std::mem::swap(&mut v, &mut nv);
        n += 1;
    }
}

/// `Λ_{σ^p ω}(f) = lim Lⁿf / Lⁿ1_ω` on `D_{σⁿω,n}`, bracketed by the min and
/// max ratio. Signed `f` is split as `Λ(f⁺) − Λ(f⁻)`.
pub fn functional_lambda(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    f: &GridFunction,
    opts: LambdaOptions,
    openness: Openness,
) -> Result<LambdaEstimate> {
    if !f.same_grid(&tc.one()) {
        return Err(Error::Grid(
            "function does not live on the cocycle grid".into(),
        ));
    }
    if f.is_nonnegative() {
        return nonnegative_lambda(tc, orbit, p, f.values(), opts, openness);
    }
    let pos = nonnegative_lambda(tc, orbit, p, f.positive_part().values(), opts, openness)?;
    let neg = nonnegative_lambda(tc, orbit, p, f.negative_part().values(), opts, openness)?;
    Ok(LambdaEstimate {
        value: pos.value - neg.value,
        error: pos.error + neg.error,
        lo: pos.lo - neg.hi,
        hi: pos.hi - neg.lo,
        iterations: pos.iterations.max(neg.iterations),
        sequences: pos.sequences.into_iter().chain(neg.sequences).collect(),
    })
}

/// `λ_ω = ρ_ω = Λ_{σω}(L_ω 1_ω)` at orbit position `p`.
pub fn fiber_lambda(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    opts: LambdaOptions,
    openness: Openness,
) -> Result<LambdaEstimate> {
    let sym = orbit.symbol(p)?;
    let l1 = tc
        .matrix(sym, openness)
        .apply(&unit_on_fiber(tc, sym, openness))?;
    functional_lambda(tc, orbit, p + 1, &l1, opts, openness)
}

/// `ν_{σ^p ω}(f)`, open or closed.
pub fn conformal_eval(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    f: &GridFunction,
    opts: LambdaOptions,
    openness: Openness,
) -> Result<Estimate> {
    Ok((&functional_lambda(tc, orbit, p, f, opts, openness)?).into())
}

/// `ρ_ω^{(n)} = inf_D L^n_{σω}(L_ω 1_ω) / L^n_{σω} 1_{σω}` for `n = 0..=n_max`;
/// the sequence increases to `λ_ω`.
pub fn rho_sequence(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    n_max: usize,
    openness: Openness,
) -> Result<Vec<f64>> {
    let est = fiber_lambda(tc, orbit, p, LambdaOptions { n_max, tol: 0.0 }, openness)?;
    Ok(est.sequences[0]
        .records
        .iter()
        .map(|r| r.min_ratio)
        .collect())
}
