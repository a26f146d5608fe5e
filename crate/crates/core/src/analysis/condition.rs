use serde::Serialize;

use crate::cocycle::{derive_seed, Orbit, RandomOpenSystem};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::operator::Openness;
use crate::oracle::CylinderTree;

/// Word count above which exact enumeration needs the Monte Carlo flag.
pub const MAX_WORDS: usize = 1_000_000;
/// Forward steps tried before a cylinder is declared non-covering.
pub const COVERING_CAP: usize = 64;
const COVER_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionOptions {
    pub n1: usize,
    pub n2: usize,
    /// Sample words instead of enumerating them.
    pub monte_carlo: bool,
    pub samples: usize,
    pub seed: u64,
    /// Cylinder depths for the covering-time table.
    pub covering_depth: usize,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions {
            n1: 1,
            n2: 1,
            monte_carlo: false,
            samples: 4096,
            seed: 0,
            covering_depth: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberCondition {
    pub symbol: usize,
    /// `ζ^{(1)}`: longest run of contiguous non-full surviving branches.
    pub zeta1: usize,
    pub hole_components: usize,
    pub full_branch_outside_hole: bool,
    /// `F^{(1)}`: least number of surviving preimages of a point.
    pub f1: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Q1Margin {
    pub n2: usize,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringRow {
    pub n: usize,
    /// Largest number of further steps before some depth-`n` piece covers
    /// `I`; `None` if a piece failed within the cap.
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub fibers: Vec<FiberCondition>,
    pub full_branch_outside_hole: bool,
    /// Maximum number of hole components over the fibers.
    pub cch: usize,
    pub n1: usize,
    pub lhs: f64,
    /// Margins `RHS − LHS` for `N₂` from the requested value up to `N₁`.
    pub q1_margins: Vec<Q1Margin>,
    pub q1_pass: bool,
    /// Largest in-piece ratio `sup g^{(n)} / inf g^{(n)}` seen, `n ≤ N₁`.
    pub distortion: f64,
    pub covering: Vec<CoveringRow>,
    pub words: usize,
    pub monte_carlo: bool,
    pub assumptions: Vec<String>,
}

/// Words of length `n` with weights: every word when there are few enough,
/// otherwise `samples` draws from the driving system with equal weight.
fn words(
    system: &RandomOpenSystem,
    n: usize,
    opts: &ConditionOptions,
) -> Result<Vec<(Vec<usize>, f64)>> {
    let s = system.alphabet_size();
    let count = (s as f64).powi(n as i32);
    if count <= MAX_WORDS as f64 {
        let driving = system.driving();
        let mut out = Vec::with_capacity(count as usize);
        let mut w = vec![0usize; n];
        loop {
            let pr = driving.word_probability(&w);
            if pr > 0.0 {
                out.push((w.clone(), pr));
            }
            let Some(i) = (0..n).rev().find(|&i| w[i] + 1 < s) else {
                break;
            };
            w[i] += 1;
            w[i + 1..].iter_mut().for_each(|x| *x = 0);
        }
        return Ok(out);
    }
    if !opts.monte_carlo {
        return Err(Error::Depth(format!(
            "{s}^{n} words exceed {MAX_WORDS}; set the Monte Carlo flag to sample them"
        )));
    }
    let wt = 1.0 / opts.samples as f64;
    (0..opts.samples)
        .map(|k| {
            let orbit = system
                .driving()
                .sample_orbit(derive_seed(opts.seed, k as u64), 0, n);
            Ok((orbit.word(0, n)?, wt))
        })
        .collect()
}

/// Forward image of a set under one fiber map, holes ignored.
fn forward_image(system: &RandomOpenSystem, symbol: usize, set: &IntervalSet) -> IntervalSet {
    let mut out = Vec::new();
    for b in system.fiber(symbol).map.branches() {
        for iv in set.intersect_interval(&b.domain()).iter() {
            if iv.length() > 0.0 {
                out.push(b.image_of(iv));
            }
        }
    }
    IntervalSet::from_intervals(out)
}

fn covering_table(
    system: &RandomOpenSystem,
    orbit: &Orbit,
    depth: usize,
) -> Result<Vec<CoveringRow>> {
    let tree = CylinderTree::build(system, orbit, 0, depth, Openness::Open)?;
    (1..=depth)
        .map(|n| {
            let mut worst = Some(0);
            for c in tree.level(n) {
                let mut j = IntervalSet::from_intervals(vec![c.image]);
                let mut steps = 0;
                while j.total_length() < 1.0 - COVER_TOL {
                    if steps == COVERING_CAP {
                        worst = None;
                        break;
                    }
                    j = forward_image(system, orbit.symbol((n + steps) as i64)?, &j);
                    steps += 1;
                }
                if worst.is_none() {
                    break;
                }
                worst = worst.map(|w: usize| w.max(steps));
            }
            Ok(CoveringRow { n, steps: worst })
        })
        .collect()
}

/// Exact (or sampled) evaluation of the averaged covering condition, plus
/// per-fiber structure, distortion and covering times.
pub fn condition_check(
    system: &RandomOpenSystem,
    opts: ConditionOptions,
) -> Result<ConditionReport> {
    if opts.n1 == 0 || opts.n2 == 0 {
        return Err(Error::config("n1", "N1 and N2 must be at least 1"));
    }
    if opts.n2 > opts.n1 {
        return Err(Error::config("n2", "N2 must not exceed N1"));
    }
    if opts.monte_carlo && opts.samples == 0 {
        return Err(Error::config("samples", "need at least one sampled word"));
    }
    let marginal = system.driving().marginal().to_vec();
    let fibers = (0..system.alphabet_size())
        .map(|s| {
            let tree =
                CylinderTree::build(system, &Orbit::from_forward(vec![s]), 0, 1, Openness::Open)?;
            Ok(FiberCondition {
                symbol: s,
                zeta1: tree.contiguous_nonfull(1),
                hole_components: system.fiber(s).hole.components(),
                full_branch_outside_hole: system.full_branches_outside_hole(s) > 0,
                f1: tree.min_preimage_count(1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let zeta_term: f64 = fibers
        .iter()
        .zip(&marginal)
        .map(|(f, m)| m * (f.zeta1 as f64 + 2.0).ln())
        .sum();

    let ws = words(system, opts.n1, &opts)?;
    let mut oscillation = 0.0;
    let mut distortion = 1.0f64;
    let mut f_logs = vec![0.0; opts.n1 + 1];
    for (w, m) in &ws {
        let tree = CylinderTree::build(
            system,
            &Orbit::from_forward(w.clone()),
            0,
            opts.n1,
            Openness::Open,
        )?;
        if tree.level(opts.n1).is_empty() {
            return Err(Error::DegenerateSystem(format!(
                "no depth-{} piece survives along word {w:?}",
                opts.n1
            )));
        }
        let (lo, hi) = tree.weight_range(opts.n1);
        oscillation += m * (hi.ln() - lo.ln());
        for k in 1..=opts.n1 {
            distortion = distortion.max(tree.distortion(k));
        }
        // F^{(n₂)} depends on the first n₂ symbols only, so prefixes reuse the tree.
        for n2 in opts.n2..=opts.n1 {
            let f = tree.min_preimage_count(n2);
            f_logs[n2] += m * if f == 0 {
                f64::NEG_INFINITY
            } else {
                (f as f64).ln()
            };
        }
    }
    let lhs = oscillation / opts.n1 as f64 + zeta_term;
    let q1_margins: Vec<Q1Margin> = (opts.n2..=opts.n1)
        .map(|n2| {
            let rhs = f_logs[n2] / n2 as f64;
            Q1Margin {
                n2,
                rhs,
                margin: rhs - lhs,
            }
        })
        .collect();
    let q1_pass = q1_margins.iter().any(|q| q.margin > 0.0);

    let orbit = system
        .driving()
        .sample_orbit(opts.seed, 0, opts.covering_depth + COVERING_CAP + 1);
    let covering = covering_table(system, &orbit, opts.covering_depth)?;

    Ok(ConditionReport {
        full_branch_outside_hole: fibers.iter().all(|f| f.full_branch_outside_hole),
        cch: fibers.iter().map(|f| f.hole_components).max().unwrap_or(0),
        fibers,
        n1: opts.n1,
        lhs,
        q1_margins,
        q1_pass,
        distortion,
        covering,
        words: ws.len(),
        monte_carlo: opts.monte_carlo && (system.alphabet_size() as f64).powi(opts.n1 as i32) > MAX_WORDS as f64,
        assumptions: vec![
            "generating partitions: assumed, automatic for piecewise monotone maps with min |T'| > 1".into(),
            "distortion is estimated from sampled weights on non-affine branches, exact for affine ones".into(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};

    #[test]
    fn cantor_margin_is_zero() {
        let sys = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let r = condition_check(&sys, ConditionOptions::default()).unwrap();
        assert!(r.full_branch_outside_hole && r.cch == 1);
        assert!((r.lhs - 2f64.ln()).abs() < 1e-15);
        assert!(r.q1_margins[0].margin.abs() < 1e-15 && !r.q1_pass);
        assert_eq!(r.fibers[0].f1, 2);
        assert_eq!(r.distortion, 1.0);
        assert!(r.covering.iter().all(|c| c.steps == Some(0)));
    }

    #[test]
    fn random_beta_escalates() {
        let sys = build_beta_system(
            &[2.0, 4.0],
            &[
                IntervalSet::from_pairs(&[[0.5, 1.0]]),
                IntervalSet::from_pairs(&[[0.75, 1.0]]),
            ],
            1.0,
            DrivingSystem::iid(vec![0.5, 0.5]).unwrap(),
            false,
        )
        .unwrap();
        let r = condition_check(
            &sys,
            ConditionOptions {
                n1: 3,
                n2: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            r.fibers.iter().map(|f| f.f1).collect::<Vec<_>>(),
            vec![1, 3]
        );
        assert!((r.lhs - 2f64.ln()).abs() < 1e-12);
        assert!((r.q1_margins[0].rhs - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!(r.q1_margins[0].margin < 0.0);
        assert_eq!(r.q1_margins.len(), 3);
        assert_eq!(r.words, 8);
    }

    #[test]
    fn word_blowup_needs_flag() {
        let sys = build_beta_system(
            &[2.0, 3.0],
            &[IntervalSet::empty(), IntervalSet::empty()],
            1.0,
            DrivingSystem::iid(vec![0.5, 0.5]).unwrap(),
            false,
        )
        .unwrap();
        let opts = ConditionOptions {
            n1: 21,
            n2: 21,
            ..Default::default()
        };
        assert!(matches!(condition_check(&sys, opts), Err(Error::Depth(_))));
    }
}
