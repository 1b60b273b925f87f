// Negated float comparisons such as `!(x > 0.0)` are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod asymptotics;
pub mod compensator;
pub mod config;
pub mod coupling;
pub mod distribution;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod renewal;
pub mod report;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod stone;

pub use distribution::{Distribution, DistributionSpec, MomentReport};
pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, GridMeasure};
