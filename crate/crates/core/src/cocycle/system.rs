use serde::{Deserialize, Serialize};

use super::branch::{Branch, FiberMap, ENDPOINT_TOL};
use super::driving::DrivingSystem;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

/// Smallest admissible β for random β-transformations.
pub const MIN_BETA: f64 = 1.01;
/// Smallest admissible |slope| for expanding affine branches.
pub const MIN_EXPANSION: f64 = 1.01;

/// The hole `H_ω`; its complement in `[0, 1]` is `I_ω`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hole {
    intervals: IntervalSet,
}

impl Hole {
    pub fn new(intervals: IntervalSet) -> Result<Self> {
        for iv in intervals.iter() {
            if iv.lo < -ENDPOINT_TOL || iv.hi > 1.0 + ENDPOINT_TOL {
                return Err(Error::Domain(format!(
                    "hole interval [{}, {}) lies outside [0, 1]",
                    iv.lo, iv.hi
                )));
            }
        }
        let clamped = intervals
            .iter()
            .map(|iv| Interval::new(iv.lo.max(0.0), iv.hi.min(1.0)))
            .collect();
        Ok(Hole {
            intervals: IntervalSet::from_intervals(clamped),
        })
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        for p in pairs {
            if p[0] < -ENDPOINT_TOL || p[1] > 1.0 + ENDPOINT_TOL || p[0] > p[1] {
                return Err(Error::Domain(format!(
                    "hole interval [{}, {}) lies outside [0, 1]",
                    p[0], p[1]
                )));
            }
        }
        Hole::new(IntervalSet::from_pairs(pairs))
    }

    pub fn none() -> Self {
        Hole::default()
    }

    pub fn intervals(&self) -> &IntervalSet {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.contains(x)
    }

    /// Number of connected components (the quantity in condition CCH).
    pub fn components(&self) -> usize {
        self.intervals.len()
    }

    /// `I_ω = [0, 1] ∖ H_ω`.
    pub fn survivors(&self) -> IntervalSet {
        self.intervals.complement()
    }
}

/// Piecewise-constant potential `φ` on one fiber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::Domain(
                "tabulated potential needs one more breakpoint than values".into(),
            ));
        }
        if breakpoints[0] != 0.0
            || *breakpoints.last().unwrap() != 1.0
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Domain(
                "tabulated breakpoints must increase strictly from 0 to 1".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("tabulated potential must be finite".into()));
        }
        Ok(StepFunction {
            breakpoints,
            values,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= x)
            .saturating_sub(1);
        self.values[idx.min(self.values.len() - 1)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    /// `φ_c = -t log|T'|`, so `g_c = |T'|^{-t}`.
    Geometric { t: f64 },
    /// `g_c = exp(φ_c)` with `φ_c` given per symbol as a step function.
    Tabulated { per_symbol: Vec<StepFunction> },
}

impl Potential {
    pub fn geometric_t(&self) -> Option<f64> {
        match self {
            Potential::Geometric { t } => Some(*t),
            Potential::Tabulated { .. } => None,
        }
    }

    /// Breakpoints of a tabulated potential on one fiber.
    pub fn breakpoints(&self, symbol: usize) -> &[f64] {
        match self {
            Potential::Geometric { .. } => &[],
            Potential::Tabulated { per_symbol } => &per_symbol[symbol].breakpoints,
        }
    }
}

/// One fiber: map, hole, and symbol index.
#[derive(Clone, Debug)]
pub struct Fiber {
    pub map: FiberMap,
    pub hole: Hole,
}

/// A point `x` with `T_ω(x) = y` and its weight `g_ω,c(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preimage {
    pub x: f64,
    pub branch: usize,
    pub weight: f64,
}

/// `g_c(x)` for a point inside `branch` of `fiber`.
pub fn weight_at(potential: &Potential, symbol: usize, branch: &Branch, x: f64) -> f64 {
    match potential {
        Potential::Geometric { t } => {
            if *t == 0.0 {
                1.0
            } else {
                branch.derivative(x).abs().powf(-t)
            }
        }
        Potential::Tabulated { per_symbol } => per_symbol[symbol].eval(x).exp(),
    }
}

/// All preimages of `y` under one fiber, with weights. With `open` set,
/// preimages inside the hole are dropped.
pub fn fiber_preimages(
    fiber: &FiberMap,
    hole: &Hole,
    potential: &Potential,
    y: f64,
    open: bool,
) -> Vec<Preimage> {
    let mut out = Vec::new();
    for (k, b) in fiber.branches().iter().enumerate() {
        let Some(x) = b.inverse(y) else { continue };
        if !fiber.contains(k, x) {
            continue;
        }
        if open && hole.contains(x) {
            continue;
        }
        out.push(Preimage {
            x,
            branch: k,
            weight: weight_at(potential, fiber.label, b, x),
        });
    }
    out
}

/// Random open weighted covering system: driving shift, per-symbol fiber
/// maps and holes, and a potential shared by all fibers.
#[derive(Clone, Debug)]
pub struct RandomOpenSystem {
    driving: DrivingSystem,
    fibers: Vec<Fiber>,
    potential: Potential,
    full_branch_guarantee: bool,
}

impl RandomOpenSystem {
    pub fn new(
        driving: DrivingSystem,
        fibers: Vec<Fiber>,
        potential: Potential,
        full_branch_guarantee: bool,
    ) -> Result<Self> {
        if fibers.len() != driving.alphabet_size() {
            return Err(Error::config(
                "fibers",
                format!(
                    "{} fibers given for an alphabet of size {}",
                    fibers.len(),
                    driving.alphabet_size()
                ),
            ));
        }
        if let Potential::Tabulated { per_symbol } = &potential {
            if per_symbol.len() != fibers.len() {
                return Err(Error::config(
                    "potential.tabulated",
                    "one step function per symbol is required",
                ));
            }
        }
        if let Potential::Geometric { t } = potential {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Domain(format!(
                    "potential parameter t = {t} must be ≥ 0"
                )));
            }
        }
        let mut fibers = fibers;
        for (s, f) in fibers.iter_mut().enumerate() {
            f.map.label = s;
        }
        let sys = RandomOpenSystem {
            driving,
            fibers,
            potential,
            full_branch_guarantee,
        };
        if full_branch_guarantee {
            for s in 0..sys.alphabet_size() {
                if sys.full_branches_outside_hole(s) == 0 {
                    return Err(Error::Domain(format!(
                        "fiber {s} has no full branch disjoint from its hole"
                    )));
                }
            }
        }
        Ok(sys)
    }

    pub fn driving(&self) -> &DrivingSystem {
        &self.driving
    }

    pub fn fibers(&self) -> &[Fiber] {
        &self.fibers
    }

    pub fn fiber(&self, symbol: usize) -> &Fiber {
        &self.fibers[symbol]
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn alphabet_size(&self) -> usize {
        self.fibers.len()
    }

    pub fn full_branch_guarantee(&self) -> bool {
        self.full_branch_guarantee
    }

    pub fn has_holes(&self) -> bool {
        self.fibers.iter().any(|f| f.hole.components() > 0)
    }

    pub fn is_affine(&self) -> bool {
        self.fibers.iter().all(|f| f.map.is_affine())
    }

    /// Same maps and holes under the geometric potential with parameter `t`.
    pub fn with_t(&self, t: f64) -> Result<Self> {
        if matches!(self.potential, Potential::Tabulated { .. }) {
            return Err(Error::Domain(
                "a tabulated potential has no geometric parameter t".into(),
            ));
        }
        RandomOpenSystem::new(
            self.driving.clone(),
            self.fibers.clone(),
            Potential::Geometric { t },
            self.full_branch_guarantee,
        )
    }

    /// Same maps and potential with every hole removed.
    pub fn closed(&self) -> Self {
        let mut sys = self.clone();
        for f in &mut sys.fibers {
            f.hole = Hole::none();
        }
        sys
    }

    pub fn weight(&self, symbol: usize, branch: usize, x: f64) -> f64 {
        weight_at(
            &self.potential,
            symbol,
            &self.fibers[symbol].map.branches()[branch],
            x,
        )
    }

    pub fn preimages(&self, symbol: usize, y: f64, open: bool) -> Vec<Preimage> {
        let f = &self.fibers[symbol];
        fiber_preimages(&f.map, &f.hole, &self.potential, y, open)
    }

    /// Number of full branches of fiber `symbol` that do not meet the hole.
    pub fn full_branches_outside_hole(&self, symbol: usize) -> usize {
        let f = &self.fibers[symbol];
        f.map
            .branches()
            .iter()
            .filter(|b| {
                let d = b.domain();
                b.is_full() && f.hole.intervals().overlap_length(d.lo, d.hi) <= ENDPOINT_TOL
            })
            .count()
    }

    /// Every branch, hole, and potential endpoint of every fiber.
    pub fn structural_points(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        for (s, f) in self.fibers.iter().enumerate() {
            pts.extend(f.map.breakpoints());
            pts.extend(f.hole.intervals().endpoints());
            pts.extend_from_slice(self.potential.breakpoints(s));
        }
        pts
    }
}

/// Random β-transformations `T(x) = βx mod 1` with per-symbol holes.
pub fn build_beta_system(
    betas: &[f64],
    holes: &[IntervalSet],
    t: f64,
    driving: DrivingSystem,
    allow_wide_holes: bool,
) -> Result<RandomOpenSystem> {
    if holes.len() != betas.len() {
        return Err(Error::config("fibers", "one hole per β is required"));
    }
    let mut fibers = Vec::with_capacity(betas.len());
    for (s, (&beta, hole)) in betas.iter().zip(holes).enumerate() {
        let map = beta_map(beta, s)?;
        let hole = Hole::new(hole.clone())?;
        let overlaps = map
            .branches()
            .iter()
            .filter(|b| {
                let d = b.domain();
                hole.intervals().overlap_length(d.lo, d.hi) > ENDPOINT_TOL
            })
            .count();
        if overlaps > 2 && !allow_wide_holes {
            return Err(Error::Domain(format!(
                "hole of fiber {s} meets {overlaps} branches; set allow_wide_holes to permit this"
            )));
        }
        fibers.push(Fiber { map, hole });
    }
    RandomOpenSystem::new(driving, fibers, Potential::Geometric { t }, false)
}

pub fn beta_map(beta: f64, label: usize) -> Result<FiberMap> {
    if !(beta >= MIN_BETA) || !beta.is_finite() {
        return Err(Error::Domain(format!(
            "β = {beta} is below the minimum {MIN_BETA}"
        )));
    }
    let count = beta.ceil() as usize;
    let mut branches = Vec::with_capacity(count);
    for k in 0..count {
        let lo = k as f64 / beta;
        let hi = if k + 1 == count {
            1.0
        } else {
            (k + 1) as f64 / beta
        };
        if hi - lo <= ENDPOINT_TOL {
            continue;
        }
        branches.push(Branch::affine(lo, hi, beta, -(k as f64))?);
    }
    FiberMap::new(branches, label)
}

/// Piecewise-affine fiber description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFiberSpec {
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Value `T(x_k⁺)` at the left end of each branch. Defaults to 0 for
    /// increasing and 1 for decreasing branches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<f64>>,
    #[serde(default)]
    pub allow_non_expanding: bool,
}

pub fn affine_map(spec: &AffineFiberSpec, label: usize) -> Result<FiberMap> {
    let bp = &spec.breakpoints;
    if bp.len() != spec.slopes.len() + 1 || spec.slopes.is_empty() {
        return Err(Error::Domain(
            "affine fiber needs one more breakpoint than slopes".into(),
        ));
    }
    if bp[0] != 0.0 || *bp.last().unwrap() != 1.0 || bp.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "breakpoints must increase strictly from 0 to 1".into(),
        ));
    }
    if let Some(starts) = &spec.starts {
        if starts.len() != spec.slopes.len() {
            return Err(Error::Domain(
                "one start value per branch is required".into(),
            ));
        }
    }
    let mut branches = Vec::with_capacity(spec.slopes.len());
    for (k, &slope) in spec.slopes.iter().enumerate() {
        if slope == 0.0 {
            return Err(Error::Domain(format!("branch {k} has zero slope")));
        }
        if slope.abs() < MIN_EXPANSION && !spec.allow_non_expanding {
            return Err(Error::Domain(format!(
                "branch {k} has |slope| = {} < {MIN_EXPANSION}; flag it as non-expanding",
                slope.abs()
            )));
        }
        let start = spec
            .starts
            .as_ref()
            .map(|s| s[k])
            .unwrap_or(if slope > 0.0 { 0.0 } else { 1.0 });
        let intercept = start - slope * bp[k];
        branches.push(Branch::affine(bp[k], bp[k + 1], slope, intercept)?);
    }
    FiberMap::new(branches, label)
}

/// Random piecewise-affine Lasota–Yorke maps with per-symbol holes.
pub fn build_affine_ly_system(
    specs: &[AffineFiberSpec],
    holes: &[IntervalSet],
    t: f64,
    driving: DrivingSystem,
) -> Result<RandomOpenSystem> {
    if holes.len() != specs.len() {
        return Err(Error::config("fibers", "one hole per fiber is required"));
    }
    let fibers = specs
        .iter()
        .zip(holes)
        .enumerate()
        .map(|(s, (spec, hole))| {
            Ok(Fiber {
                map: affine_map(spec, s)?,
                hole: Hole::new(hole.clone())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RandomOpenSystem::new(driving, fibers, Potential::Geometric { t }, false)
}
