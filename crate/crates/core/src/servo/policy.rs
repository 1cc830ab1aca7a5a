use crate::error::{Error, Result};
use crate::geometry::{EdgePose, Pose, Vec2};

/// Proportional servo gains, set-point and tangential step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServoParams {
    pub gain_r: f64,
    pub gain_theta: f64,
    /// Radial set-point, mm.
    pub r0: f64,
    /// Rotation set-point, degrees.
    pub theta0: f64,
    /// Tangential step per cycle, mm.
    pub step: f64,
}

impl Default for ServoParams {
    fn default() -> Self {
        ServoParams {
            gain_r: 1.0,
            gain_theta: 1.0,
            r0: 0.0,
            theta0: 0.0,
            step: 3.0,
        }
    }
}

impl ServoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if ![self.gain_r, self.gain_theta, self.r0, self.theta0]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::invalid("servo gains and set-point must be finite"));
        }
        Ok(())
    }

    pub fn set_point(&self) -> EdgePose {
        EdgePose::new(self.r0, self.theta0)
    }
}

/// One control move: radial `dr` (mm) along the predicted edge normal, axial
/// rotation `dtheta` (deg), then `de` (mm) along the predicted tangent.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Action {
    pub dr: f64,
    pub dtheta: f64,
    pub de: f64,
}

impl Action {
    pub const fn new(dr: f64, dtheta: f64, de: f64) -> Self {
        Action { dr, dtheta, de }
    }

    pub fn is_finite(&self) -> bool {
        self.dr.is_finite() && self.dtheta.is_finite() && self.de.is_finite()
    }
}

/// `dr = g_r (r0 - r)`, `dtheta = g_theta (theta0 - theta)`, `de = step`.
pub fn servo_step(pred: EdgePose, params: &ServoParams) -> Result<Action> {
    if !pred.is_finite() {
        return Err(Error::Policy(format!("non-finite prediction {pred:?}")));
    }
    Ok(Action {
        dr: params.gain_r * (params.r0 - pred.r),
        dtheta: params.gain_theta * (params.theta0 - pred.theta),
        de: params.step,
    })
}

/// Direction of the predicted outward edge normal for a sensor at `state`.
pub fn predicted_normal(state: &Pose, pred: &EdgePose) -> Vec2 {
    Vec2::from_angle_deg(state.heading_deg - pred.theta)
}

/// Pose after the radial and rotational parts of `action` only.
pub fn apply_correction(state: &Pose, action: &Action, pred: &EdgePose) -> Pose {
    let n = predicted_normal(state, pred);
    let p = state.position() + n * action.dr;
    Pose::new(p.x, p.y, state.heading_deg + action.dtheta)
}

/// Radial move along the predicted normal, rotation, then the tangential
/// move along the predicted tangent. Travel is counter-clockwise around
/// closed contours (forward along open ones): the tangent is the predicted
/// normal turned by +90 degrees.
pub fn apply_action(state: &Pose, action: &Action, pred: &EdgePose) -> Pose {
    let n = predicted_normal(state, pred);
    let corrected = apply_correction(state, action, pred);
    corrected.with_position(corrected.position() + n.perp() * action.de)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_examples() {
        let p = ServoParams::default();
        assert_eq!(
            servo_step(EdgePose::new(2.0, 10.0), &p).unwrap(),
            Action::new(-2.0, -10.0, 3.0)
        );
        assert_eq!(
            servo_step(EdgePose::new(0.0, 0.0), &p).unwrap(),
            Action::new(0.0, 0.0, 3.0)
        );
        let outside = ServoParams { r0: 6.0, ..p };
        assert_eq!(
            servo_step(EdgePose::new(0.0, 0.0), &outside).unwrap().dr,
            6.0
        );
        assert!(matches!(
            servo_step(EdgePose::new(f64::NAN, 0.0), &p),
            Err(Error::Policy(_))
        ));
    }

    #[test]
    fn zero_action_and_pure_rotation() {
        let s = Pose::new(1.0, 2.0, 30.0);
        let pred = EdgePose::new(0.4, -7.0);
        assert_eq!(apply_action(&s, &Action::default(), &pred), s);
        let r = apply_action(&s, &Action::new(0.0, 90.0, 0.0), &pred);
        assert_eq!((r.x, r.y, r.heading_deg), (1.0, 2.0, 120.0));
    }

    #[test]
    fn params_validation() {
        assert!(ServoParams::default().validate().is_ok());
        assert!(ServoParams {
            step: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(ServoParams {
            gain_r: f64::INFINITY,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
