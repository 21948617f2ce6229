//! Road-crossing safety evaluation for an autonomous wheelchair assisted by a
//! drone camera.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`kinematics`] simulates ground-truth trajectories and derives distance,
//!    closing speed and closing acceleration per frame.
//! 2. [`augment`] applies environmental filters to camera frames and maps each
//!    condition to a calibrated detection-degradation profile.
//! 3. [`perception`] turns detections (synthetic or ingested) into per-channel
//!    distance series, imputing a reference distance where nothing was seen.
//! 4. [`fusion`] combines the four channels per frame (A-Fusion, W-Fusion).
//! 5. [`danger`] and [`metrics`] score each series against ground truth.
//!
//! [`experiment`] wires the stages together behind a JSON configuration.

// Validation uses `!(x > y)` on purpose so NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod danger;
pub mod error;
pub mod experiment;
pub mod fusion;
pub mod kinematics;
pub mod metrics;
pub mod perception;
pub mod seed;

pub use error::{Error, Result};
