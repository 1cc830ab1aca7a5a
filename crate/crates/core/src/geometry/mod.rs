//! Planar contours built from line and arc primitives.
//!
//! Closed contours are stored counter-clockwise, so the right-hand normal of
//! the direction of travel points into free space. Open contours use the
//! same right-hand convention; the object lies on their left.

mod contour;
mod format;
mod segment;
pub mod shapes;

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub use contour::{Closest, Contour, Corner, EdgePoseGt};
pub use segment::Segment;

/// Tolerance for endpoint continuity between consecutive segments, in mm.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `deg` degrees counter-clockwise from +x.
    pub fn from_angle_deg(deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Vec2::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            Vec2::ZERO
        }
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Rotates counter-clockwise by `deg` degrees.
    pub fn rotated_deg(self, deg: f64) -> Vec2 {
        let (s, c) = deg.to_radians().sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Rotates counter-clockwise by 90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle_deg(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// World-frame sensor pose. `heading_deg` is the direction of the sensor's
/// +x axis; at the edge-pose origin it points along the outward edge normal.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, heading_deg: f64) -> Self {
        Pose { x, y, heading_deg }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn with_position(&self, p: Vec2) -> Pose {
        Pose::new(p.x, p.y, self.heading_deg)
    }

    /// Maps a point from the sensor frame into the world frame.
    pub fn to_world(&self, local: Vec2) -> Vec2 {
        self.position() + local.rotated_deg(self.heading_deg)
    }

    /// Maps a world-frame vector (not a point) into the sensor frame.
    pub fn vector_to_local(&self, v: Vec2) -> Vec2 {
        v.rotated_deg(-self.heading_deg)
    }

    /// Applies the rigid motion "rotate about the origin by `rot_deg`, then
    /// translate by `t`".
    pub fn transformed(&self, rot_deg: f64, t: Vec2) -> Pose {
        let p = self.position().rotated_deg(rot_deg) + t;
        Pose::new(p.x, p.y, self.heading_deg + rot_deg)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading_deg.is_finite()
    }
}

/// Edge pose of the sensor: radial offset `r` (mm, positive in free space)
/// and rotation `theta` (degrees) of the heading from the edge normal.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgePose {
    pub r: f64,
    pub theta: f64,
}

impl EdgePose {
    pub const fn new(r: f64, theta: f64) -> Self {
        EdgePose { r, theta }
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.theta.is_finite()
    }
}

impl From<EdgePoseGt> for EdgePose {
    fn from(gt: EdgePoseGt) -> Self {
        EdgePose::new(gt.r, gt.theta)
    }
}

/// Wraps an angle in degrees to (-180, 180].
pub fn wrap_deg(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}
