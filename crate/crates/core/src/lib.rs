pub mod analysis;
pub mod cli;
pub mod cocycle;
pub mod error;
pub mod interval;
pub mod operator;
pub mod oracle;
pub mod quenched;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
