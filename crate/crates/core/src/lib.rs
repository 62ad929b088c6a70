//! Energy statistics of multiuser MIMO downlinks serving mobile users.

pub mod asymptotics;
pub mod channel;
pub mod config;
pub mod energy;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod kernel;
pub mod mobility;
pub mod planner;
pub mod precoding;
pub mod quad;
pub mod report;
pub mod simkit;
pub mod specfun;
pub mod stats;
pub mod units;
pub mod validation;

pub use error::{Error, Result};
