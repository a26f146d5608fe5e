use std::sync::Arc;

use rayon::prelude::*;

use super::grid::{Grid, GridFunction};
use super::matrix::{ulam_matrix, Openness, TransferMatrix};
use crate::cocycle::{Orbit, RandomOpenSystem};
use crate::error::{Error, Result};

/// Largest grid for which explicit products are formed.
pub const MAX_COMPOSE_DIM: usize = 512;

/// Per-symbol open and closed Ulam matrices on a shared grid, applied along
/// orbits as `L^n_ω = L_{σ^{n-1}ω} ∘ ⋯ ∘ L_ω`.
#[derive(Clone, Debug)]
pub struct TransferCocycle {
    system: RandomOpenSystem,
    grid: Arc<Grid>,
    open: Vec<TransferMatrix>,
    closed: Vec<TransferMatrix>,
    survivors: Vec<GridFunction>,
}

impl TransferCocycle {
    pub fn new(system: &RandomOpenSystem, grid: Arc<Grid>) -> Result<Self> {
        let s = system.alphabet_size();
        // Matrices are built in parallel and collected in symbol order.
        let built: Vec<(TransferMatrix, TransferMatrix)> = (0..s)
            .into_par_iter()
            .map(|sym| {
                Ok((
                    ulam_matrix(system, sym, &grid, Openness::Open)?,
                    ulam_matrix(system, sym, &grid, Openness::Closed)?,
                ))
            })
            .collect::<Result<_>>()?;
        let (open, closed) = built.into_iter().unzip();
        let survivors = (0..s)
            .map(|sym| GridFunction::indicator(grid.clone(), &system.fiber(sym).hole.survivors()))
            .collect();
        Ok(TransferCocycle {
            system: system.clone(),
            grid,
            open,
            closed,
            survivors,
        })
    }

    /// Builds the grid from the system at resolution `n` first.
    pub fn with_resolution(system: &RandomOpenSystem, n: usize) -> Result<Self> {
        TransferCocycle::new(system, Arc::new(Grid::for_system(system, n)?))
    }

    pub fn system(&self) -> &RandomOpenSystem {
        &self.system
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn matrix(&self, symbol: usize, openness: Openness) -> &TransferMatrix {
        match openness {
            Openness::Open => &self.open[symbol],
            Openness::Closed => &self.closed[symbol],
        }
    }

    /// `1_ω` for fiber `symbol` as a grid function.
    pub fn survivor_indicator(&self, symbol: usize) -> &GridFunction {
        &self.survivors[symbol]
    }

    pub fn one(&self) -> GridFunction {
        GridFunction::constant(self.grid.clone(), 1.0)
    }

    pub fn function(&self, values: Vec<f64>) -> Result<GridFunction> {
        GridFunction::new(self.grid.clone(), values)
    }

    /// One application of `L_{σ^p ω}` to raw cell values.
    pub fn step_slice(
        &self,
        orbit: &Orbit,
        p: i64,
        x: &[f64],
        out: &mut [f64],
        openness: Openness,
    ) -> Result<()> {
        let sym = orbit.symbol(p)?;
        self.matrix(sym, openness).apply_into(x, out);
        Ok(())
    }

    /// `L^n_{σ^p ω} f`, evaluated lazily by repeated matrix-vector products.
    pub fn apply_n(
        &self,
        orbit: &Orbit,
        p: i64,
        n: usize,
        f: &GridFunction,
        openness: Openness,
    ) -> Result<GridFunction> {
        if !f.same_grid(&self.one()) {
            return Err(Error::Grid(
                "function does not live on the cocycle grid".into(),
            ));
        }
        if n > 0 {
            orbit.check_range(p, p + n as i64 - 1)?;
        }
        let mut cur = f.values().to_vec();
        let mut next = vec![0.0; cur.len()];
        for k in 0..n as i64 {
            self.step_slice(orbit, p + k, &cur, &mut next, openness)?;
            std::mem::swap(&mut cur, &mut next);
        }
        GridFunction::new(self.grid.clone(), cur)
    }

    /// Explicit product `M_{σ^{p+n-1}ω} ⋯ M_{σ^p ω}`; grids above
    /// [`MAX_COMPOSE_DIM`] cells are refused.
    pub fn compose(
        &self,
        orbit: &Orbit,
        p: i64,
        n: usize,
        openness: Openness,
    ) -> Result<TransferMatrix> {
        if n == 0 {
            return Err(Error::Domain(
                "composition length must be at least 1".into(),
            ));
        }
        if self.dim() > MAX_COMPOSE_DIM {
            return Err(Error::Grid(format!(
                "explicit composition limited to {MAX_COMPOSE_DIM} cells, grid has {}",
                self.dim()
            )));
        }
        orbit.check_range(p, p + n as i64 - 1)?;
        let mut acc = self.matrix(orbit.symbol(p)?, openness).clone();
        for k in 1..n as i64 {
            acc = self.matrix(orbit.symbol(p + k)?, openness).compose(&acc)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{build_beta_system, DrivingSystem};
    use crate::interval::IntervalSet;

    #[test]
    fn closed_doubling_fixes_one() {
        let sys = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 16).unwrap();
        let orbit = Orbit::from_forward(vec![0; 5]);
        let r = tc
            .apply_n(&orbit, 0, 5, &tc.one(), Openness::Closed)
            .unwrap();
        assert!(r.values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let m = tc.compose(&orbit, 0, 1, Openness::Closed).unwrap();
        assert_eq!(m.to_dense(), tc.matrix(0, Openness::Closed).to_dense());
    }

    #[test]
    fn open_tripling_three_steps() {
        let sys = build_beta_system(
            &[3.0],
            &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 27).unwrap();
        let orbit = Orbit::from_forward(vec![0; 3]);
        let r = tc.apply_n(&orbit, 0, 3, &tc.one(), Openness::Open).unwrap();
        let expect = (2.0f64 / 3.0).powi(3);
        assert!(r.values().iter().all(|&v| (v - expect).abs() < 1e-14));
        let composed = tc.compose(&orbit, 0, 3, Openness::Open).unwrap();
        let r2 = composed.apply(&tc.one()).unwrap();
        for (a, b) in r.values().iter().zip(r2.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn window_overrun_is_an_orbit_error() {
        let sys = build_beta_system(
            &[2.0],
            &[IntervalSet::empty()],
            1.0,
            DrivingSystem::constant(),
            false,
        )
        .unwrap();
        let tc = TransferCocycle::with_resolution(&sys, 4).unwrap();
        let orbit = Orbit::from_forward(vec![0; 2]);
        assert!(matches!(
            tc.apply_n(&orbit, 0, 3, &tc.one(), Openness::Closed),
            Err(Error::Orbit(_))
        ));
    }
}
