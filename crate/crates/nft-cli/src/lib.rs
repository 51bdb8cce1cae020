//! Experiment orchestration for the transmission toolkit: configuration,
//! physical-unit conversion, Monte-Carlo power sweeps over the stochastic
//! channel, persistence of results, and plot-data emission.

pub mod config;
pub mod experiment;
pub mod plots;
pub mod signal_io;
pub mod units;
