use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

/// Tolerance for endpoint and image checks on branch geometry.
pub const ENDPOINT_TOL: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-14;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A monotone `C²` branch given by closures for the map and its derivative.
#[derive(Clone)]
pub struct GenericMap {
    pub map: RealFn,
    pub derivative: RealFn,
}

impl fmt::Debug for GenericMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GenericMap")
    }
}

#[derive(Clone, Debug)]
pub enum BranchForm {
    Affine { slope: f64, intercept: f64 },
    Generic(GenericMap),
}

/// One monotonicity interval of a fiber map together with the map on it.
#[derive(Clone, Debug)]
pub struct Branch {
    domain: Interval,
    form: BranchForm,
    orientation: i8,
}

impl Branch {
    pub fn affine(lo: f64, hi: f64, slope: f64, intercept: f64) -> Result<Self> {
        if slope == 0.0 || !slope.is_finite() {
            return Err(Error::Domain(format!(
                "branch slope must be nonzero, got {slope}"
            )));
        }
        Branch::checked(
            Interval::new(lo, hi),
            BranchForm::Affine { slope, intercept },
            if slope > 0.0 { 1 } else { -1 },
        )
    }

    pub fn generic(
        lo: f64,
        hi: f64,
        map: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let map: RealFn = Arc::new(map);
        let derivative: RealFn = Arc::new(derivative);
        let orientation = if map(hi) > map(lo) { 1 } else { -1 };
        // Strict monotonicity is checked on a fixed sample of derivative values.
        for k in 0..=64 {
            let x = lo + (hi - lo) * k as f64 / 64.0;
            let d = derivative(x);
            if !(d * orientation as f64 > 0.0) {
                return Err(Error::Domain(format!(
                    "generic branch on [{lo}, {hi}) is not strictly monotone at x = {x}"
                )));
            }
        }
        Branch::checked(
            Interval::new(lo, hi),
            BranchForm::Generic(GenericMap { map, derivative }),
            orientation,
        )
    }

    fn checked(domain: Interval, form: BranchForm, orientation: i8) -> Result<Self> {
        if !(domain.lo < domain.hi) || domain.lo < -ENDPOINT_TOL || domain.hi > 1.0 + ENDPOINT_TOL {
            return Err(Error::Domain(format!(
                "branch domain [{}, {}) is not a subinterval of [0, 1]",
                domain.lo, domain.hi
            )));
        }
        let b = Branch {
            domain,
            form,
            orientation,
        };
        let img = b.image_of(&domain);
        if img.lo < -ENDPOINT_TOL || img.hi > 1.0 + ENDPOINT_TOL {
            return Err(Error::Domain(format!(
                "branch on [{}, {}) has image [{}, {}] outside [0, 1]",
                domain.lo, domain.hi, img.lo, img.hi
            )));
        }
        Ok(b)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn form(&self) -> &BranchForm {
        &self.form
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.form, BranchForm::Affine { .. })
    }

    pub fn slope(&self) -> Option<f64> {
        match self.form {
            BranchForm::Affine { slope, .. } => Some(slope),
            BranchForm::Generic(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.form {
            BranchForm::Affine { slope, intercept } => slope * x + intercept,
            BranchForm::Generic(g) => (g.map)(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.form {
            BranchForm::Affine { slope, .. } => *slope,
            BranchForm::Generic(g) => (g.derivative)(x),
        }
    }

    /// Image of the closed domain, clamped to `[0, 1]`.
    pub fn image(&self) -> Interval {
        let a = self.eval(self.domain.lo);
        let b = self.eval(self.domain.hi);
        Interval::new(a.min(b).max(0.0), a.max(b).min(1.0))
    }

    /// `T(Z) = I` up to [`ENDPOINT_TOL`].
    pub fn is_full(&self) -> bool {
        let img = self.image();
        img.lo <= ENDPOINT_TOL && img.hi >= 1.0 - ENDPOINT_TOL
    }

    /// Forward image of a subinterval of the domain.
    pub fn image_of(&self, iv: &Interval) -> Interval {
        let a = self.eval(iv.lo);
        let b = self.eval(iv.hi);
        Interval::new(a.min(b), a.max(b))
    }

    /// Inverse branch. Returns `None` when `y` lies outside the closed image.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        let img = self.image();
        if y < img.lo - ENDPOINT_TOL || y > img.hi + ENDPOINT_TOL {
            return None;
        }
        let x = match &self.form {
            BranchForm::Affine { slope, intercept } => (y - intercept) / slope,
            BranchForm::Generic(g) => {
                let (mut lo, mut hi) = (self.domain.lo, self.domain.hi);
                let increasing = self.orientation > 0;
                while hi - lo > BISECTION_TOL {
                    let mid = 0.5 * (lo + hi);
                    if ((g.map)(mid) < y) == increasing {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        };
        Some(x.clamp(self.domain.lo, self.domain.hi))
    }

    /// Preimage of an interval under this branch, restricted to the domain.
    pub fn preimage_of(&self, iv: &Interval) -> Option<Interval> {
        let img = self.image();
        let target = img.intersect(iv)?;
        let a = self.inverse(target.lo)?;
        let b = self.inverse(target.hi)?;
        Interval::new(a.min(b), a.max(b)).intersect(&self.domain)
    }

    /// Half-open membership in the domain; `closed_right` closes the last branch at 1.
    pub fn contains(&self, x: f64, closed_right: bool) -> bool {
        (self.domain.lo <= x && x < self.domain.hi) || (closed_right && x == self.domain.hi)
    }
}

/// A fiber map `T_ω` given by its ordered branches.
#[derive(Clone, Debug)]
pub struct FiberMap {
    branches: Vec<Branch>,
    pub label: usize,
}

impl FiberMap {
    pub fn new(branches: Vec<Branch>, label: usize) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::Domain("fiber map without branches".into()));
        }
        let mut branches = branches;
        branches.sort_by(|a, b| a.domain.lo.total_cmp(&b.domain.lo));
        if branches[0].domain.lo.abs() > ENDPOINT_TOL {
            return Err(Error::Domain("branch domains must start at 0".into()));
        }
        if (branches.last().unwrap().domain.hi - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::Domain("branch domains must end at 1".into()));
        }
        for w in branches.windows(2) {
            if (w[0].domain.hi - w[1].domain.lo).abs() > ENDPOINT_TOL {
                return Err(Error::Domain(format!(
                    "branch domains [{}, {}) and [{}, {}) do not tile [0, 1]",
                    w[0].domain.lo, w[0].domain.hi, w[1].domain.lo, w[1].domain.hi
                )));
            }
        }
        // Snap shared endpoints so the domains tile exactly.
        for k in 1..branches.len() {
            let hi = branches[k - 1].domain.hi;
            branches[k].domain.lo = hi;
        }
        branches[0].domain.lo = 0.0;
        branches.last_mut().unwrap().domain.hi = 1.0;
        Ok(FiberMap { branches, label })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn is_affine(&self) -> bool {
        self.branches.iter().all(Branch::is_affine)
    }

    /// Index of the branch whose domain contains `x`.
    pub fn branch_index(&self, x: f64) -> Option<usize> {
        if !(0.0..=1.0).contains(&x) {
            return None;
        }
        let idx = self.branches.partition_point(|b| b.domain.hi <= x);
        Some(idx.min(self.branches.len() - 1))
    }

    pub fn eval(&self, x: f64) -> Option<f64> {
        self.branch_index(x).map(|i| self.branches[i].eval(x))
    }

    pub fn contains(&self, index: usize, x: f64) -> bool {
        self.branches[index].contains(x, index + 1 == self.branches.len())
    }

    /// Branch breakpoints `0 = x_0 < … < x_k = 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.branches.iter().map(|b| b.domain.lo).collect();
        v.push(1.0);
        v
    }

    /// Whether the branch images cover `[0, 1]` up to [`ENDPOINT_TOL`].
    pub fn is_surjective(&self) -> bool {
        let images = IntervalSet::from_intervals(self.branches.iter().map(Branch::image).collect());
        images.len() == 1 && images.total_length() >= 1.0 - ENDPOINT_TOL
    }

    /// Sum of domain lengths (the partition property asserts this is 1).
    pub fn domain_length(&self) -> f64 {
        self.branches.iter().map(|b| b.domain.length()).sum()
    }
}
