//! Command implementations behind the `cbounds` binary.

pub mod algorithms;
pub mod commands;
pub mod error;
pub mod spec;

pub use algorithms::{default_algorithms, Algorithm, Method, ThetaChoice};
pub use commands::{bound, report, run, simulate, BoundRow, Manifest, Report};
pub use error::{CliError, CliResult};
pub use spec::RunSpec;
