//! Discrete predictable compensators of Gaussian processes on condensing
//! partitions, with Monte Carlo and exact second-moment experiments for
//! fractional Brownian motion.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compensator;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod model;
pub mod partition;
pub mod stats;

pub use error::{Error, Result};
pub use model::{fbm_covariance, GaussianIncrementModel, HurstIndex, ProcessKind};
pub use partition::{bisection_sequence, dyadic_sequence, Partition, PartitionSequence};
