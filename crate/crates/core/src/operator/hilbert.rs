use super::grid::{GridFunction, SupportMask};
use crate::error::{Error, Result};

/// `Θ_+(f, h) = log sup_{x,y} f(y)h(x) / (f(x)h(y))` over masked cells.
///
/// Cells where both functions vanish are skipped. A cell where exactly one
/// vanishes makes the distance `+∞`.
pub fn hilbert_metric_plus(f: &GridFunction, h: &GridFunction, mask: &SupportMask) -> Result<f64> {
    f.check_grid(h)?;
    hilbert_metric_plus_slices(f.values(), h.values(), mask.bits())
}

pub fn hilbert_metric_plus_slices(f: &[f64], h: &[f64], mask: &[bool]) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut seen = false;
    for ((&a, &b), &m) in f.iter().zip(h).zip(mask) {
        if !m || (a == 0.0 && b == 0.0) {
            continue;
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::Domain(
                "Hilbert metric needs nonnegative functions".into(),
            ));
        }
        if a == 0.0 || b == 0.0 {
            return Ok(f64::INFINITY);
        }
        seen = true;
        let r = a / b;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if !seen {
        return Err(Error::UndefinedMetric);
    }
    Ok((hi / lo).ln().max(0.0))
}
