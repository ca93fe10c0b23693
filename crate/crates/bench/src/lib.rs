//! Shared inputs for the criterion benchmarks.

use covrage_core::geometry::{Quaternion, UvPoint};
use covrage_core::harness;

/// Head rotation and access-point direction of the gently curved reference
/// trajectory.
pub fn reference_rotation() -> (Quaternion, Quaternion, UvPoint) {
    harness::reference_scenario_a().head_rotation()
}
