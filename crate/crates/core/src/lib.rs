//! Inertial navigation aided by partial gravity-gradient measurements.
//!
//! A simulated two-cloud atom-interferometer gradiometer produces one pair of
//! normalized signals per second. Instead of fitting an ellipse to a window of
//! pairs, each pair is scored directly against the ellipse predicted by a
//! gradient map at every particle's hypothesised position, and a bootstrap
//! particle filter feeds corrections back into a strapdown INS.
//!
//! The crate is organised bottom-up:
//!
//! * [`geodesy`]: WGS84, NED frames, normal gravity, great-ellipse paths
//! * [`gravmap`]: gradient grids, the `GGV1` file format, point-mass synthesis
//! * [`trajectory`]: truth kinematics for straight, level flights
//! * [`ins`]: IMU synthesis and corruption, mechanization, altimeter aiding
//! * [`gradiometer`]: interferometer signal model and candidate ellipses
//! * [`ellipsefit`]: the conventional windowed conic-fit estimator
//! * [`fusion`]: the particle filter
//! * [`harness`]: scenarios, Monte Carlo campaigns and CSV export

pub mod attitude;
pub mod ellipsefit;
pub mod error;
pub mod fusion;
pub mod geodesy;
pub mod gradiometer;
pub mod gravmap;
pub mod harness;
pub mod ins;
pub mod trajectory;

pub use error::{Error, Result};
pub use geodesy::{GeodeticPosition, NedVector};
