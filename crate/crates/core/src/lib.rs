//! Interval bounds on the average treatment effect (ATE) and the probability
//! of necessity and sufficiency (PNS) from observational and instrumental
//! variable data, plus the synthetic scenarios and metrics used to benchmark
//! them against known ground truth.

pub mod closedform;
pub mod data;
pub mod em_bounds;
pub mod entropy_bounds;
pub mod error;
pub mod info;
pub mod lp_bounds;
pub mod metrics;
pub mod outcome;
pub mod query;
pub mod scenarios;
pub mod seed;
pub mod solver;

pub use data::{empirical_binary_joint, empirical_iv_joint, BinaryJoint, Dataset, IvJoint};
pub use error::{Error, Result};
pub use info::{binary_entropy, invert_binary_entropy};
pub use outcome::{BoundOutcome, BoundResult};
pub use query::{clip_to_ceiling, Clipped, Interval, Query};
