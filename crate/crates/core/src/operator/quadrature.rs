use crate::error::{Error, Result};

pub const QUAD_TOL: f64 = 1e-10;
pub const QUAD_MAX_DEPTH: u32 = 20;

/// Adaptive Simpson integral of `f` over `[a, b]`. Running out of depth
/// before the local error estimate meets its share of `tol` is an error.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)?;
    if !v.is_finite() {
        return Err(Error::Numerics(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerics(format!(
            "adaptive Simpson did not converge on [{a}, {b}] (error estimate {:.3e})",
            delta.abs() / 15.0
        )));
    }
    Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = adaptive_simpson(
            &|x: f64| x.sin(),
            0.0,
            std::f64::consts::PI,
            QUAD_TOL,
            QUAD_MAX_DEPTH,
        )
        .unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let w = adaptive_simpson(&|x: f64| x * x, 0.0, 1.0, QUAD_TOL, QUAD_MAX_DEPTH).unwrap();
        assert!((w - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_integrand_fails_loudly() {
        let r = adaptive_simpson(&|x: f64| 1.0 / x.sqrt().max(1e-300), 0.0, 1.0, 1e-14, 4);
        assert!(matches!(r, Err(Error::Numerics(_))));
    }
}
