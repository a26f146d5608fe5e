use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridFunction};
use super::quadrature::{adaptive_simpson, QUAD_MAX_DEPTH, QUAD_TOL};
use crate::cocycle::{BranchForm, Potential, RandomOpenSystem};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Openness {
    Closed,
    Open,
}

/// Weighted Ulam matrix of one fiber operator in CSR form.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    grid: Arc<Grid>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    pub openness: Openness,
    pub symbol: usize,
    pub t: Option<f64>,
}

#[derive(Serialize)]
struct DumpHeader<'a> {
    breakpoints: &'a [f64],
    symbol: usize,
    t: Option<f64>,
    openness: Openness,
    nnz: usize,
}

impl TransferMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed in
    /// the order given.
    pub fn from_triplets(
        grid: Arc<Grid>,
        mut triplets: Vec<(usize, usize, f64)>,
        openness: Openness,
        symbol: usize,
        t: Option<f64>,
    ) -> Self {
        let n = grid.len();
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(j);
            vals.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        TransferMatrix {
            grid,
            row_ptr,
            cols,
            vals,
            openness,
            symbol,
            t,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|&(c, _)| c == j).map(|(_, v)| v).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] += v;
            }
        }
        d
    }

    /// `out = M x`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *o = self.cols[r.clone()]
                .iter()
                .zip(&self.vals[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if !(Arc::ptr_eq(&self.grid, f.grid()) || *self.grid == **f.grid()) {
            return Err(Error::Grid(
                "matrix and function live on different grids".into(),
            ));
        }
        GridFunction::new(self.grid.clone(), self.apply_slice(f.values()))
    }

    /// `Σ_i w_i M_ij` per column; equals `w_j` under Lebesgue duality.
    pub fn weighted_column_sums(&self) -> Vec<f64> {
        let w = self.grid.widths();
        let mut s = vec![0.0; self.dim()];
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                s[j] += w[i] * v;
            }
        }
        s
    }

    /// Whether column `j` has no nonzero entry.
    pub fn column_is_zero(&self, j: usize) -> bool {
        !self
            .cols
            .iter()
            .zip(&self.vals)
            .any(|(&c, &v)| c == j && v != 0.0)
    }

    /// Product `self · other` (apply `other` first). Dense accumulation, so
    /// only for diagnostics on small grids.
    pub fn compose(&self, other: &TransferMatrix) -> Result<TransferMatrix> {
        let n = self.dim();
        if other.dim() != n {
            return Err(Error::Grid("matrix dimensions differ".into()));
        }
        let mut triplets = Vec::new();
        let mut acc = vec![0.0; n];
        for i in 0..n {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    acc[j] += a * b;
                }
            }
            triplets.extend(
                acc.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (i, j, v)),
            );
        }
        Ok(TransferMatrix::from_triplets(
            self.grid.clone(),
            triplets,
            self.openness,
            self.symbol,
            self.t,
        ))
    }

    /// Coordinate-format dump: one `# {json header}` line, then `row col value`.
    pub fn write_coo(&self, mut w: impl Write) -> Result<()> {
        let header = DumpHeader {
            breakpoints: self.grid.breakpoints(),
            symbol: self.symbol,
            t: self.t,
            openness: self.openness,
            nnz: self.nnz(),
        };
        writeln!(w, "# {}", serde_json::to_string(&header)?)?;
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                writeln!(w, "{i} {j} {v:e}")?;
            }
        }
        Ok(())
    }
}

/// Weighted Ulam matrix of fiber `symbol`:
/// `M_ij = (1/w_i) Σ_b ∫_{cell_i} g(T_b⁻¹y) 1[T_b⁻¹y ∈ cell_j ∩ Z_b (∖ H)] dy`.
pub fn ulam_matrix(
    system: &RandomOpenSystem,
    symbol: usize,
    grid: &Arc<Grid>,
    openness: Openness,
) -> Result<TransferMatrix> {
    let fiber = system.fiber(symbol);
    let survivors = match openness {
        Openness::Open => fiber.hole.survivors(),
        Openness::Closed => IntervalSet::unit(),
    };
    let potential = system.potential();
    let widths = grid.widths();
    let mut triplets = Vec::new();
    for (k, branch) in fiber.map.branches().iter().enumerate() {
        let dom = branch.domain();
        for j in grid.cells_overlapping(dom.lo, dom.hi) {
            let Some(piece) = grid.cell(j).intersect(&dom) else {
                continue;
            };
            for part in survivors.intersect_interval(&piece).iter() {
                match branch.form() {
                    BranchForm::Affine { .. } => {
                        // g is constant on `part` for geometric potentials, and for
                        // tabulated ones since their breakpoints are grid points.
                        let g = system.weight(symbol, k, part.midpoint());
                        let img = branch.image_of(part);
                        for i in grid.cells_overlapping(img.lo, img.hi) {
                            let ov = grid.cell(i).overlap(img.lo, img.hi);
                            if ov > 0.0 {
                                triplets.push((i, j, g * ov / widths[i]));
                            }
                        }
                    }
                    BranchForm::Generic(_) => {
                        let img = branch.image_of(part);
                        for i in grid.cells_overlapping(img.lo, img.hi) {
                            let Some(xs) = branch.preimage_of(&grid.cell(i)) else {
                                continue;
                            };
                            let Some(xs) = xs.intersect(part) else {
                                continue;
                            };
                            let integrand = |x: f64| match potential {
                                Potential::Geometric { t } => {
                                    branch.derivative(x).abs().powf(1.0 - t)
                                }
                                Potential::Tabulated { .. } => {
                                    system.weight(symbol, k, x) * branch.derivative(x).abs()
                                }
                            };
                            let v = adaptive_simpson(
                                &integrand,
                                xs.lo,
                                xs.hi,
                                QUAD_TOL,
                                QUAD_MAX_DEPTH,
                            )?;
                            if v > 0.0 {
                                triplets.push((i, j, v / widths[i]));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(TransferMatrix::from_triplets(
        grid.clone(),
        triplets,
        openness,
        symbol,
        potential.geometric_t(),
    ))
}

/// Whether cell `j` of `grid` lies inside the hole of fiber `symbol`.
pub fn cell_in_hole(system: &RandomOpenSystem, symbol: usize, grid: &Grid, j: usize) -> bool {
    let c: Interval = grid.cell(j);
    system
        .fiber(symbol)
        .hole
        .intervals()
        .overlap_length(c.lo, c.hi)
        >= 0.5 * c.length()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, Branch, DrivingSystem, Fiber, FiberMap, Hole};

    fn cantor(t: f64) -> RandomOpenSystem {
        build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            t,
            DrivingSystem::constant(),
            false,
        )
        .unwrap()
    }

    fn doubling(t: f64) -> RandomOpenSystem {
        build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            t,
            DrivingSystem::constant(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn doubling_two_cells() {
        let sys = doubling(1.0);
        let grid = Arc::new(Grid::for_system(&sys, 2).unwrap());
        let m = ulam_matrix(&sys, 0, &grid, Openness::Closed).unwrap();
        let d = m.to_dense();
        for row in &d {
            for &v in row {
                assert!((v - 0.5).abs() < 1e-15);
            }
        }
        let one = GridFunction::constant(grid.clone(), 1.0);
        assert!(m
            .apply(&one)
            .unwrap()
            .values()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-15));
        let zero = GridFunction::zeros(grid);
        assert!(m.apply(&zero).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn doubling_t0_counts_preimages() {
        let sys = doubling(0.0);
        let grid = Arc::new(Grid::for_system(&sys, 16).unwrap());
        let m = ulam_matrix(&sys, 0, &grid, Openness::Closed).unwrap();
        let r = m.apply_slice(&vec![1.0; grid.len()]);
        assert!(r.iter().all(|&v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn open_tripling_zeroes_hole_column() {
        let sys = cantor(1.0);
        let grid = Arc::new(Grid::new(vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap());
        let m = ulam_matrix(&sys, 0, &grid, Openness::Open).unwrap();
        assert!(m.column_is_zero(1));
        let sums = m.weighted_column_sums();
        assert!((sums[0] - 1.0 / 3.0).abs() < 1e-15 && (sums[2] - 1.0 / 3.0).abs() < 1e-15);
        let r = m.apply_slice(&[1.0, 1.0, 1.0]);
        assert!(r.iter().all(|&v| (v - 2.0 / 3.0).abs() < 1e-15));
        assert!(cell_in_hole(&sys, 0, &grid, 1) && !cell_in_hole(&sys, 0, &grid, 0));
    }

    #[test]
    fn lebesgue_duality_affine_t1() {
        let sys = build_beta_system(
            &[2.5],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let grid = Arc::new(Grid::for_system(&sys, 97).unwrap());
        let m = ulam_matrix(&sys, 0, &grid, Openness::Closed).unwrap();
        for (s, w) in m.weighted_column_sums().iter().zip(grid.widths()) {
            assert!((s - w).abs() < 1e-12);
        }
    }

    #[test]
    fn generic_branch_duality_by_quadrature() {
        let eps = 0.05;
        let tau = std::f64::consts::TAU;
        let b0 = Branch::generic(
            0.0,
            0.5,
            move |x| 2.0 * x + eps * (tau * x).sin() / tau * 2.0,
            move |x| 2.0 + 2.0 * eps * (tau * x).cos(),
        )
        .unwrap();
        let b1 = Branch::affine(0.5, 1.0, 2.0, -1.0).unwrap();
        let sys = RandomOpenSystem::new(
            DrivingSystem::constant(),
            vec![Fiber {
                map: FiberMap::new(vec![b0, b1], 0).unwrap(),
                hole: Hole::none(),
            }],
            Potential::Geometric { t: 1.0 },
            false,
        )
        .unwrap();
        let grid = Arc::new(Grid::for_system(&sys, 64).unwrap());
        let m = ulam_matrix(&sys, 0, &grid, Openness::Closed).unwrap();
        for (s, w) in m.weighted_column_sums().iter().zip(grid.widths()) {
            assert!((s - w).abs() < 1e-9, "{s} vs {w}");
        }
    }

    #[test]
    fn dump_has_header_and_entries() {
        let sys = doubling(1.0);
        let grid = Arc::new(Grid::for_system(&sys, 2).unwrap());
        let m = ulam_matrix(&sys, 0, &grid, Openness::Closed).unwrap();
        let mut buf = Vec::new();
        m.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: serde_json::Value =
            serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
        assert_eq!(header["nnz"], 4);
        assert_eq!(lines.count(), 4);
    }
}
