use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::IntervalSet;

/// Relative slack on the box length, absorbing endpoint rounding.
const ROUND_GUARD: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct BoxCount {
    pub slope: f64,
    /// Set when every supplied survivor set was empty.
    pub empty: bool,
    /// `(log(1/ε), log N(ε))` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Fewest intervals of length `ε` covering `set`. Greedy left-to-right
/// placement is optimal on the line.
pub fn covering_count(set: &IntervalSet, eps: f64) -> u64 {
    let reach = eps * (1.0 + ROUND_GUARD);
    let mut count = 0u64;
    let mut covered_to = f64::NEG_INFINITY;
    for iv in set.iter() {
        let mut start = iv.lo.max(covered_to);
        while start < iv.hi {
            count += 1;
            covered_to = start + reach;
            start = covered_to;
        }
    }
    count
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)`. Without explicit
/// `scales`, `ε` at each depth is the shortest component at that depth.
pub fn box_count_dimension(survivors: &[IntervalSet], scales: Option<&[f64]>) -> Result<BoxCount> {
    if let Some(s) = scales {
        if s.len() != survivors.len() {
            return Err(Error::config("scales", "need one scale per survivor depth"));
        }
    }
    if !survivors.is_empty() && survivors.iter().all(IntervalSet::is_empty) {
        return Ok(BoxCount {
            slope: 0.0,
            empty: true,
            points: Vec::new(),
        });
    }
    let mut points = Vec::new();
    for (d, set) in survivors.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let eps = match scales {
            Some(s) => s[d],
            None => set
                .iter()
                .map(|iv| iv.length())
                .fold(f64::INFINITY, f64::min),
        };
        if !(eps > 0.0 && eps.is_finite()) {
            continue;
        }
        points.push(((1.0 / eps).ln(), (covering_count(set, eps) as f64).ln()));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "box counting needs 3 distinct scales, got {}",
            xs.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(BoxCount {
        slope: sxy / sxx,
        empty: false,
        points,
    })
}
