//! Config-driven pipeline behind the `openrds` binary. Each subcommand
//! writes its reports into the configured output directory; JSON reports
//! carry the config hash, seed, version and wall time.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_check, cmd_decay, cmd_density, cmd_dimension, cmd_escape, cmd_oracle, cmd_pressure,
    load_config, run, Command, Meta, VERSION,
};
pub use config::{
    CheckSection, DecaySection, DensitySection, DimensionSection, EscapeSection, OracleSection,
    OrbitWindow, RunConfig, Samples,
};
