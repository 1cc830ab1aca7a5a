use super::Vec2;

/// A contour primitive, parametrised by arc length `s` in `[0, length]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Segment {
    Line {
        start: Vec2,
        end: Vec2,
    },
    /// Circular arc from `start_deg` sweeping `sweep_deg` (positive is
    /// counter-clockwise) about `center`.
    Arc {
        center: Vec2,
        radius: f64,
        start_deg: f64,
        sweep_deg: f64,
    },
}

impl Segment {
    pub fn line(start: Vec2, end: Vec2) -> Self {
        Segment::Line { start, end }
    }

    pub fn arc(center: Vec2, radius: f64, start_deg: f64, sweep_deg: f64) -> Self {
        Segment::Arc {
            center,
            radius,
            start_deg,
            sweep_deg,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => start.distance(end),
            Segment::Arc {
                radius, sweep_deg, ..
            } => radius * sweep_deg.abs().to_radians(),
        }
    }

    pub fn start(&self) -> Vec2 {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Vec2 {
        match *self {
            Segment::Line { end, .. } => end,
            _ => self.point_at(self.length()),
        }
    }

    fn arc_angle(start_deg: f64, sweep_deg: f64, radius: f64, s: f64) -> f64 {
        if sweep_deg >= 0.0 {
            start_deg + (s / radius).to_degrees()
        } else {
            start_deg - (s / radius).to_degrees()
        }
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        match *self {
            Segment::Line { start, end } => {
                let len = start.distance(end);
                if s >= len {
                    end
                } else {
                    start + (end - start) * (s / len)
                }
            }
            Segment::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => {
                center
                    + Vec2::from_angle_deg(Self::arc_angle(start_deg, sweep_deg, radius, s))
                        * radius
            }
        }
    }

    /// Unit tangent in the direction of travel.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        match *self {
            Segment::Line { start, end } => (end - start).normalized(),
            Segment::Arc {
                radius,
                start_deg,
                sweep_deg,
                ..
            } => {
                let radial = Vec2::from_angle_deg(Self::arc_angle(start_deg, sweep_deg, radius, s));
                if sweep_deg >= 0.0 {
                    radial.perp()
                } else {
                    -radial.perp()
                }
            }
        }
    }

    /// Right-hand unit normal (outward for a counter-clockwise closed contour).
    pub fn normal_at(&self, s: f64) -> Vec2 {
        -self.tangent_at(s).perp()
    }

    /// Signed curvature (positive turns left).
    pub fn curvature(&self) -> f64 {
        match *self {
            Segment::Line { .. } => 0.0,
            Segment::Arc {
                radius, sweep_deg, ..
            } => sweep_deg.signum() / radius,
        }
    }

    /// Closest point on the segment to `p`, as `(s, point)`. Points whose
    /// projection falls outside the segment clamp to an endpoint with `s`
    /// exactly `0.0` or `length()`.
    pub fn closest(&self, p: Vec2) -> (f64, Vec2) {
        match *self {
            Segment::Line { start, end } => {
                let d = end - start;
                let t = ((p - start).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
                let len = d.norm();
                if t == 0.0 {
                    (0.0, start)
                } else if t == 1.0 {
                    (len, end)
                } else {
                    (t * len, start + d * t)
                }
            }
            Segment::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => {
                let len = self.length();
                let d = p - center;
                if d.norm_sq() == 0.0 {
                    return (0.0, self.start());
                }
                let phi = d.angle_deg();
                let rel = if sweep_deg >= 0.0 {
                    (phi - start_deg).rem_euclid(360.0)
                } else {
                    (start_deg - phi).rem_euclid(360.0)
                };
                let span = sweep_deg.abs();
                if rel <= span {
                    let s = (rel / span * len).min(len);
                    (s, center + d * (radius / d.norm()))
                } else {
                    let a = self.start();
                    let b = self.end();
                    if p.distance(a) <= p.distance(b) {
                        (0.0, a)
                    } else {
                        (len, b)
                    }
                }
            }
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { start, end } => Segment::Line {
                start: end,
                end: start,
            },
            Segment::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => Segment::Arc {
                center,
                radius,
                start_deg: start_deg + sweep_deg,
                sweep_deg: -sweep_deg,
            },
        }
    }

    /// Rotate about the origin by `rot_deg`, then translate by `t`.
    pub fn transformed(&self, rot_deg: f64, t: Vec2) -> Segment {
        match *self {
            Segment::Line { start, end } => Segment::Line {
                start: start.rotated_deg(rot_deg) + t,
                end: end.rotated_deg(rot_deg) + t,
            },
            Segment::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => Segment::Arc {
                center: center.rotated_deg(rot_deg) + t,
                radius,
                start_deg: start_deg + rot_deg,
                sweep_deg,
            },
        }
    }

    /// Twice the signed area contribution (`∮ x dy - y dx`).
    pub(crate) fn area2(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => start.cross(end),
            Segment::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => {
                let a0 = start_deg.to_radians();
                let a1 = (start_deg + sweep_deg).to_radians();
                radius * center.x * (a1.sin() - a0.sin())
                    - radius * center.y * (a1.cos() - a0.cos())
                    + radius * radius * (a1 - a0)
            }
        }
    }

    pub(crate) fn is_finite(&self) -> bool {
        match *self {
            Segment::Line { start, end } => start.is_finite() && end.is_finite(),
            Segment::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => {
                center.is_finite()
                    && radius.is_finite()
                    && start_deg.is_finite()
                    && sweep_deg.is_finite()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_closest_clamps_exactly() {
        let l = Segment::line(Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0));
        assert_eq!(l.closest(Vec2::new(5.0, 1.0)).0, 3.0);
        assert_eq!(l.closest(Vec2::new(-1.0, 1.0)).0, 0.0);
        let (s, q) = l.closest(Vec2::new(1.0, 2.0));
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(q, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn arc_normals_point_away_for_ccw_and_toward_for_cw() {
        let ccw = Segment::arc(Vec2::ZERO, 2.0, 0.0, 90.0);
        assert!((ccw.normal_at(0.0) - Vec2::new(1.0, 0.0)).norm() < 1e-12);
        let cw = ccw.reversed();
        assert!((cw.start() - Vec2::new(0.0, 2.0)).norm() < 1e-12);
        assert!((cw.normal_at(0.0) - Vec2::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn arc_closest_outside_span_picks_endpoint() {
        let a = Segment::arc(Vec2::ZERO, 1.0, 0.0, 90.0);
        let (s, q) = a.closest(Vec2::new(0.5, -3.0));
        assert_eq!(s, 0.0);
        assert_eq!(q, a.start());
        let (s, _) = a.closest(Vec2::new(-0.1, 5.0));
        assert_eq!(s, a.length());
    }

    #[test]
    fn arc_area_of_full_circle() {
        let c = Segment::arc(Vec2::new(3.0, -1.0), 2.0, 10.0, 360.0);
        assert!((c.area2() / 2.0 - std::f64::consts::PI * 4.0).abs() < 1e-10);
    }
}
