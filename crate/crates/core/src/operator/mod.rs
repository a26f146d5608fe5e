//! Weighted Ulam discretization of the closed and open fiber operators.

pub mod grid;
pub mod hilbert;
pub mod matrix;
pub mod quadrature;
pub mod transfer;

pub use grid::{bv_norm, sup_norm, variation, Grid, GridFunction, SupportMask};
pub use hilbert::{hilbert_metric_plus, hilbert_metric_plus_slices};
pub use matrix::{ulam_matrix, Openness, TransferMatrix};
pub use transfer::TransferCocycle;
