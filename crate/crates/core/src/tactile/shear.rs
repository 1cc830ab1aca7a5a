use crate::geometry::Vec2;

/// Accumulated tangential shear of the sensing surface (sensor frame, mm),
/// modelled as a first-order lag on the relative surface motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearState {
    pub s: Vec2,
    pub decay: f64,
    pub gain: f64,
    pub cap: f64,
}

impl Default for ShearState {
    fn default() -> Self {
        ShearState {
            s: Vec2::ZERO,
            decay: 0.7,
            gain: 0.5,
            cap: 3.0,
        }
    }
}

impl ShearState {
    pub fn new(decay: f64, gain: f64, cap: f64) -> Self {
        assert!(
            (0.0..1.0).contains(&decay),
            "shear decay must lie in [0, 1)"
        );
        assert!(gain >= 0.0 && cap >= 0.0);
        ShearState {
            s: Vec2::ZERO,
            decay,
            gain,
            cap,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `motion` is the displacement of the contacted surface relative to the
    /// sensor, in the sensor frame (the negative of the sensor's own motion).
    pub fn update(&self, motion: Vec2, in_contact: bool) -> ShearState {
        let s = if in_contact {
            let raw = self.s * self.decay + motion * self.gain;
            let n = raw.norm();
            if n > self.cap {
                raw * (self.cap / n)
            } else {
                raw
            }
        } else {
            self.s * self.decay
        };
        ShearState { s, ..*self }
    }

    /// Steady-state magnitude for a repeated identical step `step` in contact.
    pub fn fixed_point(&self, step: f64) -> f64 {
        (self.gain * step / (1.0 - self.decay)).min(self.cap)
    }
}

/// `update_shear` as a free function.
pub fn update_shear(shear: &ShearState, motion: Vec2, in_contact: bool) -> ShearState {
    shear.update(motion, in_contact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_motion_keeps_zero() {
        let s = ShearState::default().update(Vec2::ZERO, true);
        assert_eq!(s.s, Vec2::ZERO);
    }

    #[test]
    fn direct_substitution() {
        let s = ShearState::new(0.7, 0.5, 3.0).update(Vec2::new(3.0, 0.0), true);
        assert_eq!(s.s, Vec2::new(1.5, 0.0));
    }

    #[test]
    fn out_of_contact_only_decays() {
        let s = ShearState {
            s: Vec2::new(1.0, -1.0),
            ..Default::default()
        };
        let next = s.update(Vec2::new(5.0, 5.0), false);
        assert!((next.s - Vec2::new(0.7, -0.7)).norm() < 1e-15);
    }

    #[test]
    fn repeated_steps_converge_to_geometric_fixed_point() {
        for (step, expect_capped) in [(0.6, false), (1.5, false), (5.0, true)] {
            let mut s = ShearState::default();
            let m = Vec2::new(step * 0.6, step * 0.8);
            for _ in 0..100 {
                s = s.update(m, true);
                assert!(s.s.norm() <= s.cap + 1e-12);
            }
            let expected = s.fixed_point(step);
            assert_eq!(expected == s.cap, expect_capped);
            assert!((s.s.norm() - expected).abs() < 1e-9, "step {step}");
        }
    }
}
