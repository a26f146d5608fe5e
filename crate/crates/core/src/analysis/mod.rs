//! Expected pressure, Bowen dimension, escape rates, decay of correlations
//! and the checks of the standing conditions.

pub mod condition;
pub mod conditional;
pub mod decay;
pub mod dimension;
pub mod escape;
pub mod fit;
pub mod ly;
pub mod pressure;

pub use condition::{
    condition_check, ConditionOptions, ConditionReport, CoveringRow, FiberCondition, Q1Margin,
    COVERING_CAP, MAX_WORDS,
};
pub use conditional::{conditional_invariance_residual, ConditionalSeries};
pub use decay::{decay_fit, write_decay_csv, DecayOptions, DecayReport, DecaySeries, PooledFit};
pub use dimension::{
    bowen_dimension, box_count_comparison, BisectionStep, DimensionMethod, DimensionReport,
    MAX_ORBITS,
};
pub use escape::{escape_rate, EscapeReport, AGREE_FLOOR};
pub use fit::{linear_fit, LinearFit};
pub use ly::{ly_constants, LyConstants};
pub use pressure::{
    expected_pressure, lambda_product, mean_stderr, pressure_curve, sandwich_bounds,
    write_pressure_csv, Estimator, MonteCarloOptions, PressureCurve, PressureSample,
    PressureSampler,
};
