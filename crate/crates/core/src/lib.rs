//! Downlink transceiver beamforming and admission control for an underlay
//! cognitive radio network served by a massive-MIMO secondary base station.
//!
//! The pipeline for a single Monte Carlo trial is:
//!
//! 1. [`array`]: place the nodes and synthesize line-of-sight channels.
//! 2. [`estimation`]: perturb the primary-user channel parameters the way the
//!    secondary base station would observe them.
//! 3. [`basis`]: build the interval-averaged interference matrices around the
//!    estimated primary-user directions.
//! 4. [`beamforming`]: nullsteering receive and transmit beams plus the
//!    resulting effective gains and interference coefficients.
//! 5. [`admission`]: equal-power, equal-rate and exact 0-1 selection of the
//!    users to serve.
//!
//! [`harness`] drives the pipeline over parameter sweeps and [`config`] reads
//! the experiment files consumed by the `underlay` command line tool.

pub mod admission;
pub mod array;
pub mod basis;
pub mod beamforming;
pub mod config;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod report;
pub mod verify;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Converts a power in dBm to milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Converts a power in milliwatts to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversions() {
        assert_eq!(dbm_to_mw(0.0), 1.0);
        assert!((dbm_to_mw(60.0) - 1e6).abs() < 1e-6);
        assert!((dbm_to_mw(-20.0) - 0.01).abs() < 1e-15);
        assert!((mw_to_dbm(dbm_to_mw(37.5)) - 37.5).abs() < 1e-12);
    }
}
