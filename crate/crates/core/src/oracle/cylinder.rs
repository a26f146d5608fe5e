use serde::Serialize;

use crate::cocycle::{Branch, BranchForm, Orbit, Potential, RandomOpenSystem};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::operator::Openness;

/// Node count above which cylinder enumeration gives up.
pub const MAX_CYLINDERS: usize = 10_000_000;
const FULL_TOL: f64 = 1e-12;
/// Interior samples used to bracket non-constant weights on a piece.
const WEIGHT_SAMPLES: usize = 8;

/// A depth-`k` piece: a maximal interval on which `T^k` is monotone and, in
/// open mode, whose first `k` iterates avoid the holes.
#[derive(Clone, Debug, Serialize)]
pub struct Cylinder {
    pub interval: Interval,
    pub word: Vec<usize>,
    pub image: Interval,
    pub weight_inf: f64,
    pub weight_sup: f64,
}

impl Cylinder {
    pub fn is_full(&self) -> bool {
        self.image.lo <= FULL_TOL && self.image.hi >= 1.0 - FULL_TOL
    }
}

/// Cylinder pieces of `T^k_{σ^p ω}` for `k = 0..=depth`.
#[derive(Clone, Debug, Serialize)]
pub struct CylinderTree {
    pub position: i64,
    pub openness: Openness,
    levels: Vec<Vec<Cylinder>>,
}

fn branch_weight_bounds(
    system: &RandomOpenSystem,
    symbol: usize,
    k: usize,
    b: &Branch,
    piece: &Interval,
) -> (f64, f64) {
    let constant = match (system.potential(), b.form()) {
        (Potential::Geometric { .. }, BranchForm::Affine { .. }) => true,
        (Potential::Tabulated { per_symbol }, BranchForm::Affine { .. }) => {
            let bp = &per_symbol[symbol].breakpoints;
            !bp.iter().any(|&x| x > piece.lo && x < piece.hi)
        }
        _ => false,
    };
    if constant {
        let g = system.weight(symbol, k, piece.midpoint());
        return (g, g);
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for s in 0..=WEIGHT_SAMPLES {
        let x = piece.lo + piece.length() * s as f64 / WEIGHT_SAMPLES as f64;
        let g = system.weight(symbol, k, x);
        lo = lo.min(g);
        hi = hi.max(g);
    }
    (lo, hi)
}

impl CylinderTree {
    pub fn build(
        system: &RandomOpenSystem,
        orbit: &Orbit,
        p: i64,
        depth: usize,
        openness: Openness,
    ) -> Result<Self> {
        if depth > 0 {
            orbit.check_range(p, p + depth as i64 - 1)?;
        }
        let root = Cylinder {
            interval: Interval::new(0.0, 1.0),
            word: Vec::new(),
            image: Interval::new(0.0, 1.0),
            weight_inf: 1.0,
            weight_sup: 1.0,
        };
        let mut levels = vec![vec![root]];
        let mut total = 1usize;
        for level in 0..depth {
            let sym = orbit.symbol(p + level as i64)?;
            let fiber = system.fiber(sym);
            let allowed = match openness {
                Openness::Open => fiber.hole.survivors(),
                Openness::Closed => IntervalSet::unit(),
            };
            let mut next = Vec::new();
            for c in &levels[level] {
                for (k, b) in fiber.map.branches().iter().enumerate() {
                    let Some(zc) = b.domain().intersect(&c.image) else {
                        continue;
                    };
                    for piece in allowed.intersect_interval(&zc).iter() {
                        let ends = [
                            pull_back(system, orbit, p, &c.word, piece.lo)?,
                            pull_back(system, orbit, p, &c.word, piece.hi)?,
                        ];
                        let interval = Interval::new(ends[0].min(ends[1]), ends[0].max(ends[1]));
                        let (glo, ghi) = branch_weight_bounds(system, sym, k, b, piece);
                        let mut word = c.word.clone();
                        word.push(k);
                        next.push(Cylinder {
                            interval,
                            word,
                            image: b.image_of(piece),
                            weight_inf: c.weight_inf * glo,
                            weight_sup: c.weight_sup * ghi,
                        });
                    }
                }
            }
            next.sort_by(|a, b| a.interval.lo.total_cmp(&b.interval.lo));
            total += next.len();
            if total > MAX_CYLINDERS {
                return Err(Error::Depth(format!(
                    "cylinder enumeration exceeded {MAX_CYLINDERS} nodes at depth {}",
                    level + 1
                )));
            }
            levels.push(next);
        }
        Ok(CylinderTree {
            position: p,
            openness,
            levels,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &[Cylinder] {
        &self.levels[k]
    }

    pub fn leaves(&self) -> &[Cylinder] {
        self.levels.last().unwrap()
    }

    /// `ζ^{(k)}`: longest run of consecutive non-full pieces at depth `k`.
    ///
    /// Consecutive surviving pieces are contiguous by construction, since
    /// whatever separates them lies in one component of `⋃_j T^{-j}(H)`.
    pub fn contiguous_nonfull(&self, k: usize) -> usize {
        let mut best = 0;
        let mut run = 0;
        for c in self.level(k) {
            if c.is_full() {
                run = 0;
            } else {
                run += 1;
                best = best.max(run);
            }
        }
        best
    }

    /// `F^{(k)} = min_y #{surviving depth-k preimages of y}`.
    pub fn min_preimage_count(&self, k: usize) -> usize {
        min_coverage(self.level(k).iter().map(|c| c.image))
    }

    /// `[inf g^{(k)}, sup g^{(k)}]` over the depth-`k` pieces.
    pub fn weight_range(&self, k: usize) -> (f64, f64) {
        self.level(k)
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), c| {
                (lo.min(c.weight_inf), hi.max(c.weight_sup))
            })
    }

    /// Largest `sup g^{(k)} / inf g^{(k)}` within a single piece.
    pub fn distortion(&self, k: usize) -> f64 {
        self.level(k)
            .iter()
            .map(|c| c.weight_sup / c.weight_inf)
            .fold(1.0, f64::max)
    }

    /// Whether every depth-`k` piece is full.
    pub fn all_full(&self, k: usize) -> bool {
        self.level(k).iter().all(Cylinder::is_full)
    }
}

/// Inverse of `T^k` along `word`, starting from the innermost branch.
fn pull_back(
    system: &RandomOpenSystem,
    orbit: &Orbit,
    p: i64,
    word: &[usize],
    y: f64,
) -> Result<f64> {
    let mut x = y;
    for (j, &b) in word.iter().enumerate().rev() {
        let sym = orbit.symbol(p + j as i64)?;
        let br = &system.fiber(sym).map.branches()[b];
        x = br.inverse(x).ok_or_else(|| {
            Error::Numerics(format!(
                "point {x} fell outside the image of branch {b} during pullback"
            ))
        })?;
    }
    Ok(x)
}

/// Minimum number of intervals covering a point of `[0, 1]`, over all points
/// outside a finite set.
pub fn min_coverage(images: impl Iterator<Item = Interval>) -> usize {
    let mut events: Vec<(f64, i64)> = Vec::new();
    for iv in images {
        events.push((iv.lo.max(0.0), 1));
        events.push((iv.hi.min(1.0), -1));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cover = 0i64;
    let mut best = i64::MAX;
    let mut x = 0.0;
    let mut i = 0;
    while i < events.len() {
        let at = events[i].0;
        if at - x > FULL_TOL {
            best = best.min(cover);
        }
        while i < events.len() && events[i].0 - at <= FULL_TOL {
            cover += events[i].1;
            i += 1;
        }
        x = at;
    }
    if 1.0 - x > FULL_TOL {
        best = best.min(cover);
    }
    if best == i64::MAX {
        0
    } else {
        best.max(0) as usize
    }
}

/// `ζ^{(n)}` along the word starting at `p`.
pub fn contiguous_nonfull_count(
    system: &RandomOpenSystem,
    orbit: &Orbit,
    p: i64,
    n: usize,
) -> Result<usize> {
    Ok(CylinderTree::build(system, orbit, p, n, Openness::Open)?.contiguous_nonfull(n))
}
