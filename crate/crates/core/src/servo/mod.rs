//! The proportional edge servo: a control law on the perceived edge pose,
//! world-frame pose updates and the contour-following loop for tapping and
//! sliding.

mod metrics;
mod policy;
mod run;

pub use crate::geometry::EdgePose;
pub use crate::tactile::Mode;
pub use metrics::{trajectory_metrics, Metrics};
pub use policy::{
    apply_action, apply_correction, predicted_normal, servo_step, Action, ServoParams,
};
pub use run::{
    default_start_arclength, expected_steps, run_contour, start_pose, Oracle, Perceiver, RunSetup,
    Status, StepRecord, Trajectory, CLOSURE_RADIUS_STEPS, LOST_EDGE_MM,
};
