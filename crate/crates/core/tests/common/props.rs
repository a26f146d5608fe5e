//! Property suites shared by the `properties` and `acceptance` targets.

use openrds::analysis::ly_constants;
use openrds::cocycle::{build_beta_system, DrivingSystem, Orbit, RandomOpenSystem};
use openrds::operator::{
    hilbert_metric_plus, GridFunction, Openness, SupportMask, TransferCocycle,
};
use openrds::oracle::{pullback, survivor_intervals, CylinderTree};
use openrds::quenched::{conformal_eval, d_mask, LambdaOptions};
use openrds::IntervalSet;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 128;

/// A random one- or two-fiber β system with one hole per fiber, a sampled
/// orbit and a grid size.
#[derive(Clone, Debug)]
pub struct Case {
    pub betas: Vec<f64>,
    pub holes: Vec<[f64; 2]>,
    pub t: f64,
    pub seed: u64,
    pub resolution: usize,
    pub values: Vec<f64>,
    pub other: Vec<f64>,
}

impl Case {
    pub fn system(&self) -> Option<RandomOpenSystem> {
        let holes: Vec<IntervalSet> = self
            .holes
            .iter()
            .map(|h| IntervalSet::from_pairs(&[*h]))
            .collect();
        let driving = if self.betas.len() == 1 {
            DrivingSystem::constant()
        } else {
            DrivingSystem::iid(vec![0.5; 2]).ok()?
        };
        build_beta_system(&self.betas, &holes, self.t, driving, false).ok()
    }

    pub fn orbit(&self, system: &RandomOpenSystem) -> Orbit {
        system.driving().sample_orbit(self.seed, 40, 60)
    }

    /// Grid function from the raw sample, cycled to the grid length.
    pub fn function(&self, tc: &TransferCocycle, raw: &[f64]) -> GridFunction {
        let values = (0..tc.dim()).map(|i| raw[i % raw.len()]).collect();
        tc.function(values).unwrap()
    }
}

pub fn cases(max_beta: f64) -> impl Strategy<Value = Case> {
    (1usize..=2)
        .prop_flat_map(move |s| {
            (
                prop::collection::vec(2.2f64..max_beta, s),
                prop::collection::vec((0.0f64..0.8, 0.02f64..0.2), s),
                0.0f64..=1.0,
                any::<u64>(),
                16usize..=96,
                prop::collection::vec(0.05f64..1.0, 1..40),
                prop::collection::vec(0.05f64..1.0, 1..40),
            )
        })
        .prop_map(|(betas, holes, t, seed, resolution, values, other)| Case {
            betas,
            holes: holes
                .into_iter()
                .map(|(a, w)| [a, (a + w).min(1.0)])
                .collect(),
            t,
            seed,
            resolution,
            values,
            other,
        })
}

fn run(max_beta: f64, test: impl Fn(Case) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&cases(max_beta), test)
        .map_err(|e| e.to_string())
}

fn setup(case: &Case) -> Result<(RandomOpenSystem, TransferCocycle, Orbit), TestCaseError> {
    let Some(system) = case.system() else {
        return Err(TestCaseError::reject("system rejected by the builder"));
    };
    let tc = TransferCocycle::with_resolution(&system, case.resolution)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let orbit = case.orbit(&system);
    Ok((system, tc, orbit))
}

fn fail(e: openrds::Error) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

/// The inf and sup of `Lⁿf / Lⁿ1_ω` nest as `n` grows.
pub fn ratio_monotonicity() -> Result<(), String> {
    run(5.0, |case| {
        let (_, tc, orbit) = setup(&case)?;
        let one = tc.survivor_indicator(orbit.symbol(0).unwrap()).clone();
        let mut u = case
            .function(&tc, &case.values)
            .mul(&one)
            .unwrap()
            .into_values();
        let mut v = one.into_values();
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let (mut nu, mut nv) = (vec![0.0; u.len()], vec![0.0; v.len()]);
        for n in 0..30 {
            let mut cur = (f64::INFINITY, f64::NEG_INFINITY);
            for (&a, &b) in u.iter().zip(&v) {
                if b > 0.0 {
                    cur = (cur.0.min(a / b), cur.1.max(a / b));
                }
            }
            if cur.0 > cur.1 {
                break;
            }
            let slack = 1e-10 * cur.1.abs();
            prop_assert!(
                cur.0 >= lo - slack && cur.1 <= hi + slack,
                "n = {n}: {cur:?} left [{lo}, {hi}]"
            );
            (lo, hi) = cur;
            tc.step_slice(&orbit, n, &u, &mut nu, Openness::Open)
                .unwrap();
            tc.step_slice(&orbit, n, &v, &mut nv, Openness::Open)
                .unwrap();
            let s = nv.iter().cloned().fold(0.0, f64::max);
            if s == 0.0 {
                break;
            }
            nu.iter_mut().for_each(|x| *x /= s);
            nv.iter_mut().for_each(|x| *x /= s);
            std::mem::swap(&mut u, &mut nu);
            std::mem::swap(&mut v, &mut nv);
        }
        Ok(())
    })
}

/// `D_{ω,k+1} ⊆ D_{ω,k}` for `k ≥ 1`.
pub fn mask_nesting() -> Result<(), String> {
    run(5.0, |case| {
        let (_, tc, orbit) = setup(&case)?;
        let mut prev: Option<SupportMask> = None;
        for k in 1..=20 {
            let m = d_mask(&tc, &orbit, 0, k).map_err(fail)?;
            if let Some(p) = &prev {
                prop_assert!(m.is_subset_of(p), "D_{} not inside D_{}", k, k - 1);
            }
            prev = Some(m);
        }
        Ok(())
    })
}

/// The explicit product matrix agrees with repeated application.
pub fn composition_law() -> Result<(), String> {
    run(5.0, |case| {
        let (_, tc, orbit) = setup(&case)?;
        let f = case.function(&tc, &case.values);
        for openness in [Openness::Open, Openness::Closed] {
            for n in 1..=6usize {
                let m = tc.compose(&orbit, 0, n, openness).map_err(fail)?;
                let direct = m.apply(&f).unwrap();
                let iterated = tc.apply_n(&orbit, 0, n, &f, openness).unwrap();
                let scale = iterated.sup_norm().max(1.0);
                let err = direct.sub(&iterated).unwrap().sup_norm();
                prop_assert!(
                    err <= 1e-10 * scale,
                    "n = {n}: error {err} at scale {scale}"
                );
            }
        }
        Ok(())
    })
}

/// One open step never increases the projective distance of two positive
/// functions.
pub fn hilbert_contraction() -> Result<(), String> {
    run(5.0, |case| {
        let (_, tc, orbit) = setup(&case)?;
        let mut f = case.function(&tc, &case.values);
        let mut h = case.function(&tc, &case.other);
        for p in 0..10 {
            let one = tc.survivor_indicator(orbit.symbol(p).unwrap()).clone();
            f = f.mul(&one).unwrap();
            h = h.mul(&one).unwrap();
            let before = hilbert_metric_plus(&f, &h, &SupportMask::full(tc.dim()));
            let sym = orbit.symbol(p).unwrap();
            let (lf, lh) = (
                tc.matrix(sym, Openness::Open).apply(&f).unwrap(),
                tc.matrix(sym, Openness::Open).apply(&h).unwrap(),
            );
            let after = hilbert_metric_plus(&lf, &lh, &SupportMask::full(tc.dim()));
            match (before, after) {
                (Ok(b), Ok(a)) => {
                    prop_assert!(a <= b * (1.0 + 1e-12) + 1e-12, "step {p}: {a} > {b}")
                }
                // Everything fell into the hole.
                (_, Err(_)) => break,
                (Err(e), _) => return Err(TestCaseError::fail(e.to_string())),
            }
            f = lf;
            h = lh;
        }
        Ok(())
    })
}

/// `T^{-n}(X_{σⁿω,m}) ∩ X_{ω,n} = X_{ω,n+m}` on exact intervals.
pub fn survivor_recursion() -> Result<(), String> {
    let strategy = (cases(3.5), 0usize..=10, 0usize..=10);
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |(case, n, m)| {
            prop_assume!(n + m <= 10);
            let Some(system) = case.system() else {
                return Err(TestCaseError::reject("system rejected by the builder"));
            };
            let orbit = case.orbit(&system);
            let tail = survivor_intervals(&system, &orbit, n as i64, m).map_err(fail)?;
            let lhs = pullback(&system, &orbit, 0, n, &tail)
                .map_err(fail)?
                .intersection(&survivor_intervals(&system, &orbit, 0, n).map_err(fail)?);
            let rhs = survivor_intervals(&system, &orbit, 0, n + m).map_err(fail)?;
            prop_assert_eq!(lhs.len(), rhs.len());
            if !rhs.is_empty() {
                let d = lhs.max_endpoint_distance(&rhs).unwrap();
                prop_assert!(d <= 1e-12, "endpoint distance {}", d);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `var(Lⁿf) ≤ A var(f) + B ν_ω(|f|)` with the computed constants.
pub fn ly_variation() -> Result<(), String> {
    let strategy = (cases(5.0), 1usize..=3);
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |(case, n)| {
            let (_, tc, orbit) = setup(&case)?;
            let opts = LambdaOptions {
                n_max: 200,
                tol: 1e-12,
            };
            let c = match ly_constants(&tc, &orbit, 0, n, opts) {
                Ok(c) => c,
                Err(openrds::Error::DegenerateSystem(_)) => {
                    return Err(TestCaseError::reject("degenerate"))
                }
                Err(e) => return Err(fail(e)),
            };
            // A signed function with both parts present.
            let f = case
                .function(&tc, &case.values)
                .sub(&case.function(&tc, &case.other))
                .unwrap();
            let lf = tc.apply_n(&orbit, 0, n, &f, Openness::Open).unwrap();
            let nu = conformal_eval(&tc, &orbit, 0, &f.map(f64::abs), opts, Openness::Open)
                .map_err(fail)?;
            let bound = c.a * f.variation() + c.b * (nu.value + nu.error);
            prop_assert!(
                lf.variation() <= bound * (1.0 + 1e-9),
                "var {} above {}",
                lf.variation(),
                bound
            );
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// At `t = 1` the closed operator preserves Lebesgue integrals and the
/// open one preserves the integral over the survivor set.
pub fn lebesgue_duality() -> Result<(), String> {
    run(5.0, |mut case| {
        case.t = 1.0;
        let (_, tc, orbit) = setup(&case)?;
        let f = case.function(&tc, &case.values);
        let sym = orbit.symbol(0).unwrap();
        let closed = tc
            .matrix(sym, Openness::Closed)
            .apply(&f)
            .unwrap()
            .integral();
        prop_assert!((closed - f.integral()).abs() <= 1e-12 * f.integral().max(1.0));
        let restricted = f.mul(tc.survivor_indicator(sym)).unwrap();
        let open = tc.matrix(sym, Openness::Open).apply(&f).unwrap().integral();
        prop_assert!((open - restricted.integral()).abs() <= 1e-12 * f.integral().max(1.0));
        Ok(())
    })
}

/// `ζ^{(n)} ≤ n Π (ζ^{(1)} + 2)` for `n ≤ 5`.
pub fn zeta_product() -> Result<(), String> {
    run(5.0, |case| {
        let Some(system) = case.system() else {
            return Err(TestCaseError::reject("system rejected by the builder"));
        };
        let orbit = case.orbit(&system);
        let tree = CylinderTree::build(&system, &orbit, 0, 5, Openness::Open).map_err(fail)?;
        let mut bound = 1.0;
        for n in 1..=5usize {
            let z1 = CylinderTree::build(&system, &orbit, n as i64 - 1, 1, Openness::Open)
                .map_err(fail)?
                .contiguous_nonfull(1);
            bound *= z1 as f64 + 2.0;
            let zn = tree.contiguous_nonfull(n) as f64;
            prop_assert!(
                zn <= n as f64 * bound,
                "ζ^({}) = {} above {}",
                n,
                zn,
                n as f64 * bound
            );
        }
        Ok(())
    })
}

pub const SUITES: [(&str, fn() -> Result<(), String>); 8] = [
    ("ratio monotonicity", ratio_monotonicity),
    ("mask nesting", mask_nesting),
    ("composition law", composition_law),
    ("Hilbert contraction", hilbert_contraction),
    ("survivor recursion", survivor_recursion),
    ("Lasota-Yorke variation", ly_variation),
    ("Lebesgue duality", lebesgue_duality),
    ("zeta product bound", zeta_product),
];
