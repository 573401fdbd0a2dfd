//! Config handling and experiment runner behind the `sim` binary.

pub mod config;
pub mod run;
