//! Channel estimation for wideband mmWave MIMO links with hybrid
//! analog/digital beamforming and few-bit ADCs.
//!
//! The crate simulates the training phase of a frequency-selective channel,
//! recovers the channel with orthogonal matching pursuit over an angular
//! dictionary or with plain least squares, and runs Monte Carlo NMSE sweeps.

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod presets;
pub mod quantizer;
pub mod report;
pub mod rng;
pub mod sensing;

pub use error::{Error, Result};
