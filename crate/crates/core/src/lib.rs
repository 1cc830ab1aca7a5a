//! Tactile edge perception and contour following in simulation.
//!
//! The crate is organised as a pipeline:
//!
//! * [`geometry`]: planar contours (arcs and lines) with signed distance and
//!   ground-truth edge pose queries.
//! * [`tactile`]: a pin-lattice optical tactile sensor model that turns a
//!   pose over a contour into grey-scale frames, for tapping and sliding.
//! * [`nn`]: a small CNN engine (conv, pool, dense, dropout) with Adam,
//!   early stopping and a binary model format.
//! * [`dataset`]: the tap collection protocol, shift augmentation and the
//!   binary dataset format.
//! * [`servo`]: the proportional servo policy, the contour-following loop
//!   and trajectory metrics.
//! * [`report`]: CSV and SVG writers plus the disk parameter grid.

mod binio;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod nn;
pub mod report;
pub mod rng;
pub mod servo;
pub mod tactile;

pub use binio::write_atomic;
pub use dataset::{Dataset, Sample};
pub use error::{Error, Result};
pub use geometry::{Contour, EdgePose, EdgePoseGt, Pose, Segment, Vec2};
pub use nn::{Architecture, LabelRanges, Network, NetworkSpec, TrainConfig};
pub use servo::{Action, ServoParams, Status, Trajectory};
pub use tactile::{ContactParams, Mode, PinLattice, SensorModel, ShearState, TactileFrame};
