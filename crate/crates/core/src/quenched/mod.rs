//! Quenched objects along a sampled orbit: the limit functional `Λ_ω`,
//! multipliers `λ_ω`, conformal measures, the invariant density and
//! measure, and the conditionally invariant measure `η_ω`.

pub mod battery;
pub mod density;
pub mod lambda;
pub mod measure;

pub use battery::{standard_battery, TestFunction};
pub use density::{d_mask, d_masks, invariant_density, DMaskSequence, DensityEstimate, STABLE_RUN};
pub use lambda::{
    conformal_eval, fiber_lambda, functional_lambda, rho_sequence, unit_on_fiber, Estimate,
    LambdaEstimate, LambdaOptions, RatioRecord, RatioSequence,
};
pub use measure::{
    closed_conformal_eval, closed_is_lebesgue, closed_lambda, invariant_measure_eval,
    measure_battery, raccim_eval, InvariantMeasure, MeasureEstimate, MeasureKind, Raccim,
};
