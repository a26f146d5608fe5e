use std::sync::Arc;

use crate::cocycle::RandomOpenSystem;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

/// Smallest admissible cell width.
pub const MIN_CELL_WIDTH: f64 = 1e-12;
/// Structural points this close to a uniform point replace it.
pub const SNAP_TOL: f64 = 1e-12;

/// Breakpoints `0 = x_0 < … < x_N = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    breakpoints: Vec<f64>,
    widths: Vec<f64>,
}

impl Grid {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::Grid("breakpoints must run from 0 to 1".into()));
        }
        let widths: Vec<f64> = breakpoints.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some((i, w)) = widths
            .iter()
            .enumerate()
            .find(|(_, &w)| !(w >= MIN_CELL_WIDTH))
        {
            return Err(Error::Grid(format!(
                "cell {i} has width {w:e}, below the floor {MIN_CELL_WIDTH:e}"
            )));
        }
        Ok(Grid {
            breakpoints,
            widths,
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Grid("grid needs at least one cell".into()));
        }
        Grid::new((0..=n).map(|k| k as f64 / n as f64).collect())
    }

    /// Uniform `n`-cell grid refined by every structural point in `extra`.
    pub fn refined(n: usize, extra: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid(format!("resolution {n} is below 2")));
        }
        let mut structural: Vec<f64> = extra.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        structural.sort_by(f64::total_cmp);
        structural.dedup_by(|a, b| (*a - *b).abs() <= SNAP_TOL);
        let near_structural = |x: f64| {
            let k = structural.partition_point(|&s| s < x);
            let below = k.checked_sub(1).map(|k| structural[k]);
            let above = structural.get(k).copied();
            below.is_some_and(|s| x - s <= SNAP_TOL) || above.is_some_and(|s| s - x <= SNAP_TOL)
        };
        let mut pts: Vec<f64> = (0..=n)
            .map(|k| k as f64 / n as f64)
            .filter(|&x| !near_structural(x))
            .collect();
        pts.extend(structural);
        pts.push(0.0);
        pts.push(1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Grid::new(pts)
    }

    /// Grid for `system`: uniform `n` cells plus all branch, hole, and
    /// potential breakpoints of every fiber.
    pub fn for_system(system: &RandomOpenSystem, n: usize) -> Result<Self> {
        Grid::refined(n, &system.structural_points())
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn max_width(&self) -> f64 {
        self.widths.iter().copied().fold(0.0, f64::max)
    }

    pub fn cell(&self, i: usize) -> Interval {
        Interval::new(self.breakpoints[i], self.breakpoints[i + 1])
    }

    /// Index of the cell containing `x`; 1 belongs to the last cell.
    pub fn cell_of(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.len() - 1)
    }

    /// Cells overlapping `[lo, hi)` with positive length.
    pub fn cells_overlapping(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        if hi <= lo {
            let k = self.cell_of(lo);
            return k..k;
        }
        let start = self.breakpoints[1..].partition_point(|&b| b <= lo);
        let end = self.breakpoints[..self.len()].partition_point(|&b| b < hi);
        start..end.max(start)
    }
}

/// Boolean cell mask, e.g. the support `D_{ω,n}` of an iterate.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(transparent)]
pub struct SupportMask {
    bits: Vec<bool>,
}

impl SupportMask {
    pub fn new(bits: Vec<bool>) -> Self {
        SupportMask { bits }
    }

    pub fn full(n: usize) -> Self {
        SupportMask {
            bits: vec![true; n],
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_subset_of(&self, other: &SupportMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn intersect(&self, other: &SupportMask) -> SupportMask {
        SupportMask::new(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a && b)
                .collect(),
        )
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }
}

/// Piecewise-constant function on a grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.len();
        GridFunction {
            grid,
            values: vec![c; n],
        }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        GridFunction::constant(grid, 0.0)
    }

    /// Cell fractions covered by `set`; exact indicators when the set's
    /// endpoints are grid points.
    pub fn indicator(grid: Arc<Grid>, set: &IntervalSet) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let c = grid.cell(i);
                set.overlap_length(c.lo, c.hi) / grid.widths()[i]
            })
            .collect();
        GridFunction { grid, values }
    }

    /// Cell averages produced by `avg(lo, hi)`.
    pub fn from_cell_averages(grid: Arc<Grid>, avg: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let c = grid.cell(i);
                avg(c.lo, c.hi)
            })
            .collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Grid("grid functions live on different grids".into()))
        }
    }

    /// Value on the cell containing `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.grid.cell_of(x)]
    }

    pub fn variation(&self) -> f64 {
        variation(&self.values)
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    pub fn bv_norm(&self) -> f64 {
        self.variation() + self.sup_norm()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// `∫ f dx` against Lebesgue measure.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.widths())
            .map(|(v, w)| v * w)
            .sum()
    }

    pub fn support(&self) -> SupportMask {
        SupportMask::new(self.values.iter().map(|&v| v > 0.0).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        self.check_grid(other)?;
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn positive_part(&self) -> GridFunction {
        self.map(|v| v.max(0.0))
    }

    pub fn negative_part(&self) -> GridFunction {
        self.map(|v| (-v).max(0.0))
    }
}

/// Jump sum `Σ |v_{i+1} − v_i|` of a piecewise-constant representative.
pub fn variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn bv_norm(values: &[f64]) -> f64 {
    variation(values) + sup_norm(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn builds_refined_grids() {
        let doubling = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        assert!(close(
            Grid::for_system(&doubling, 2).unwrap().breakpoints(),
            &[0.0, 0.5, 1.0]
        ));

        let cantor = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let g = Grid::for_system(&cantor, 2).unwrap();
        assert!(close(
            g.breakpoints(),
            &[0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0]
        ));

        let beta = build_beta_system(
            &[2.5],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let g = Grid::for_system(&beta, 4).unwrap();
        assert!(g.breakpoints().contains(&0.4) && g.breakpoints().contains(&0.8));
        assert!(Grid::for_system(&beta, 1).is_err());
    }

    #[test]
    fn snaps_near_points_and_rejects_thin_cells() {
        let g = Grid::refined(4, &[0.25 + 1e-13]).unwrap();
        assert_eq!(g.len(), 4);
        assert!(Grid::new(vec![0.0, 0.5, 0.5 + 1e-14, 1.0]).is_err());
    }

    #[test]
    fn variation_examples() {
        let g = Arc::new(Grid::new(vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap());
        assert_eq!(GridFunction::constant(g.clone(), 3.0).variation(), 0.0);
        let ind = GridFunction::indicator(
            g.clone(),
            &IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]]),
        );
        assert_eq!(ind.values(), &[0.0, 1.0, 0.0]);
        assert_eq!(ind.variation(), 2.0);
        assert_eq!(variation(&[0.0, 1.0, 0.0, 1.0]), 3.0);
        assert_eq!(bv_norm(&[0.0, 1.0, 0.0, 1.0]), 4.0);
    }

    #[test]
    fn cell_lookup() {
        let g = Grid::uniform(4).unwrap();
        assert_eq!(g.cell_of(0.0), 0);
        assert_eq!(g.cell_of(0.25), 1);
        assert_eq!(g.cell_of(1.0), 3);
        assert_eq!(g.cells_overlapping(0.2, 0.5), 0..2);
        assert_eq!(g.cells_overlapping(0.25, 0.75), 1..3);
        assert_eq!(g.cells_overlapping(0.3, 0.3), 1..1);
    }
}
