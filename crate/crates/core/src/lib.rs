//! Lattice epidemic automaton and mean-field optical bistability for driven
//! Rydberg gases.
//!
//! * [`lattice`]: three-state grid, Moore neighbourhood and synchronous
//!   stochastic stepping with counter-based randomness.
//! * [`epidemic`]: SIS/SIR experiments, multi-domain layouts, gradients,
//!   threshold scans and domain walls.
//! * [`optics`]: three-level ladder steady state with a Rydberg-population
//!   feedback shift; hysteresis scans and multistability maps.
//! * [`fitting`]: tanh, multi-tanh and Gaussian least-squares fits and
//!   susceptibility extraction.

pub mod epidemic;
pub mod fitting;
pub mod lattice;
pub mod optics;
pub mod rng;
