//! Random driving, fiber maps with holes, and potentials.

pub mod branch;
pub mod driving;
pub mod spec;
pub mod system;

pub use branch::{Branch, BranchForm, FiberMap, GenericMap};
pub use driving::{derive_seed, DrivingKind, DrivingSystem, Orbit};
pub use spec::{FiberSpec, PotentialSpec, SystemSpec};
pub use system::{
    build_affine_ly_system, build_beta_system, fiber_preimages, AffineFiberSpec, Fiber, Hole,
    Potential, Preimage, RandomOpenSystem, StepFunction,
};
