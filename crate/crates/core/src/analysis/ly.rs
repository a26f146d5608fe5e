use serde::Serialize;

use crate::cocycle::Orbit;
use crate::error::Result;
use crate::interval::IntervalSet;
use crate::operator::{GridFunction, Openness, TransferCocycle};
use crate::oracle::{Cylinder, CylinderTree};
use crate::quenched::{fiber_lambda, functional_lambda, LambdaOptions};

/// Computable upper bounds for the Lasota–Yorke constants of `L^n_ω`, so
/// that `var(Lⁿf) ≤ A var(f) + B ν_ω(|f|)`, and their normalized versions
/// `Q = A / ρⁿ`, `K = B / ρⁿ`.
#[derive(Clone, Debug, Serialize)]
pub struct LyConstants {
    pub n: usize,
    /// Exact `ζ^{(n)}` from the cylinder tree, used as `ξ`.
    pub xi: usize,
    /// `n Π_{j<n} (ζ^{(1)}_{σʲω} + 2)`.
    pub zeta_product_bound: f64,
    /// `‖g^{(n)}_ω‖_∞` over the open depth-`n` pieces.
    pub sup_g: f64,
    /// Lower bound for `δ_{ω,n}`.
    pub delta_lower: f64,
    /// Pieces whose image functional could not be bounded away from zero.
    pub bad_pieces: usize,
    pub a: f64,
    pub b: f64,
    /// `Π_{j<n}` of the lower Λ brackets of `λ_{σʲω}`.
    pub rho_n_lower: f64,
    pub q: f64,
    pub k: f64,
}

/// `sup_y Σ_{Z : y ∈ TⁿZ} sup_Z g^{(n)}`, an upper bound for `‖Lⁿ1_ω‖_∞`.
fn weighted_max_coverage(pieces: &[Cylinder]) -> f64 {
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * pieces.len());
    for c in pieces {
        events.push((c.image.lo, c.weight_sup));
        events.push((c.image.hi, -c.weight_sup));
    }
    // Closing events first at ties, so touching images never stack.
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut acc = 0.0;
    let mut best = 0.0f64;
    for (_, w) in events {
        acc += w;
        best = best.max(acc);
    }
    best
}

pub fn ly_constants(
    tc: &TransferCocycle,
    orbit: &Orbit,
    p: i64,
    n: usize,
    opts: LambdaOptions,
) -> Result<LyConstants> {
    let system = tc.system();
    let tree = CylinderTree::build(system, orbit, p, n, Openness::Open)?;
    let xi = tree.contiguous_nonfull(n);
    let mut zeta_product_bound = n as f64;
    for j in 0..n as i64 {
        let z1 =
            CylinderTree::build(system, orbit, p + j, 1, Openness::Open)?.contiguous_nonfull(1);
        zeta_product_bound *= z1 as f64 + 2.0;
    }
    let pieces = tree.level(n);
    let (_, sup_g) = tree.weight_range(n);
    let coverage = weighted_max_coverage(pieces);

    let mut delta_lower = f64::INFINITY;
    let mut bad_pieces = 0;
    for c in pieces {
        let lam_lo = if c.is_full() {
            1.0
        } else {
            let ind = GridFunction::indicator(
                tc.grid().clone(),
                &IntervalSet::from_intervals(vec![c.image]),
            );
            functional_lambda(tc, orbit, p + n as i64, &ind, opts, Openness::Open)?.lo
        };
        if lam_lo <= 0.0 {
            bad_pieces += 1;
            continue;
        }
        delta_lower = delta_lower.min(c.weight_inf * lam_lo / coverage);
    }
    if !delta_lower.is_finite() {
        delta_lower = 0.0;
    }
    let xi_f = xi as f64;
    let a = (9.0 + 16.0 * xi_f) * sup_g;
    let b = 8.0 * (2.0 * xi_f + 1.0) * sup_g / delta_lower;
    let mut rho_n_lower = 1.0;
    for j in 0..n as i64 {
        rho_n_lower *= fiber_lambda(tc, orbit, p + j, opts, Openness::Open)?.lo;
    }
    Ok(LyConstants {
        n,
        xi,
        zeta_product_bound,
        sup_g,
        delta_lower,
        bad_pieces,
        a,
        b,
        rho_n_lower,
        q: a / rho_n_lower,
        k: b / rho_n_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};

    fn constants(beta: f64, hole: &[[f64; 2]], t: f64, n: usize) -> LyConstants {
        let sys = build_beta_system(
            &[beta],
            &[IntervalSet::from_pairs(hole)],
            t,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 54).unwrap();
        let orbit = Orbit::periodic(&[0], 10, 20);
        ly_constants(&tc, &orbit, 0, n, LambdaOptions::default()).unwrap()
    }

    #[test]
    fn doubling_examples() {
        let c = constants(2.0, &[], 1.0, 1);
        assert_eq!(c.xi, 0);
        assert!((c.sup_g - 0.5).abs() < 1e-15 && (c.a - 4.5).abs() < 1e-14);
        // t = 0: both weights are 1 and ‖L1‖ = 2, so δ = 1/2.
        let c = constants(2.0, &[], 0.0, 1);
        assert!((c.a - 9.0).abs() < 1e-14);
        assert!((c.delta_lower - 0.5).abs() < 1e-14 && (c.b - 16.0).abs() < 1e-12);
        assert!((c.rho_n_lower - 2.0).abs() < 1e-9);
    }

    #[test]
    fn cantor_within_product_bound() {
        let c = constants(3.0, &[[1.0 / 3.0, 2.0 / 3.0]], 1.0, 1);
        assert!(c.a <= 25.0 / 3.0 + 1e-12);
        assert!(c.xi as f64 <= c.zeta_product_bound);
        let c = constants(2.5, &[[0.8, 1.0]], 1.0, 3);
        assert!(c.xi as f64 <= c.zeta_product_bound);
        assert!(c.delta_lower > 0.0 && c.q.is_finite() && c.k.is_finite());
    }
}
