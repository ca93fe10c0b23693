//! Receive beamforming that covers the predicted access-point trajectory of a
//! rotating mmWave VR headset.
//!
//! The pipeline runs from two headset orientations (current and predicted) to
//! a single analog antenna weight vector:
//!
//! 1. [`geometry`] turns the head rotation into the apparent access-point path
//!    in sine-space (UV coordinates) by quaternion Slerp.
//! 2. [`array`] models the uniform rectangular array and its interleaved and
//!    localized sub-array partitions.
//! 3. [`planner`] covers the path with sub-beams, reinforces or subdivides
//!    sub-arrays as needed and phase-aligns adjacent sub-beams.
//! 4. [`link`] and [`harness`] evaluate the result: directional gain along the
//!    path, noise penalty, MCS selection and single-beam baselines.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod link;
pub mod planner;
pub mod scenario;

pub use array::{ArrayConfig, Awv, SteeringDirection, SubArrayLayout};
pub use error::{Error, Result};
pub use geometry::{EulerAngles, Quaternion, Trajectory, UvPoint, Vec3};
pub use harness::SweepResult;
pub use link::{LinkParams, McsEntry, McsTable};
pub use planner::BeamPlan;
pub use scenario::{Scenario, Strategy};

pub use num_complex::Complex64;
