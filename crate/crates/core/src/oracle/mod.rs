//! Ground truth that bypasses the grid: exact survivor intervals, cylinder
//! enumeration, preimage-tree point evaluation, closed-form pressure for
//! full-branch affine systems, and box counting.

pub mod analytic;
pub mod boxcount;
pub mod cylinder;
pub mod point;
pub mod survivors;

pub use analytic::{
    analytic_lambdas, analytic_pressure, analytic_root, analytic_slopes, is_analytic, AnalyticRoot,
};
pub use boxcount::{box_count_dimension, covering_count, BoxCount};
pub use cylinder::{contiguous_nonfull_count, min_coverage, Cylinder, CylinderTree};
pub use point::point_transfer;
pub use survivors::{
    fiber_preimage, pullback, survivor_intervals, survivor_sequence, survivors_into,
    write_survivors_csv,
};
