use super::{wrap_deg, Pose, Segment, Vec2, CONTINUITY_TOL};
use crate::error::{Error, Result};

/// Joints whose tangents differ by more than this (radians) are corners.
const CORNER_TOL_RAD: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    name: String,
    segments: Vec<Segment>,
    closed: bool,
    starts: Vec<f64>,
    length: f64,
}

/// Result of a closest-point query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Closest {
    pub segment: usize,
    pub local_s: f64,
    /// Arc length of the closest point from the contour start.
    pub arclength: f64,
    pub point: Vec2,
    pub distance: f64,
    /// Outward normal used for the edge angle. At a corner this is the
    /// normal of the lower-indexed adjacent segment.
    pub normal: Vec2,
    /// True when the closest point is a corner (normal undefined).
    pub corner: bool,
    sign_dir: Vec2,
}

/// Ground-truth edge pose of a sensor relative to a contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgePoseGt {
    /// Signed normal distance, mm; positive on the free-space side.
    pub r: f64,
    /// Heading minus outward normal direction, degrees in (-180, 180].
    pub theta: f64,
    /// The closest point was a corner; `theta` used the lower-indexed
    /// segment's normal.
    pub ambiguous: bool,
    /// Arc length of the closest contour point.
    pub arclength: f64,
}

/// A non-smooth joint between two segments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner {
    pub arclength: f64,
    pub point: Vec2,
    /// Signed turning angle of the direction of travel (positive = left,
    /// i.e. convex for a counter-clockwise closed contour).
    pub turning_deg: f64,
}

impl Contour {
    /// Builds a contour, checking continuity and closure. Closed contours
    /// with clockwise orientation are reversed to counter-clockwise.
    pub fn new(name: impl Into<String>, segments: Vec<Segment>, closed: bool) -> Result<Self> {
        let name = name.into();
        if segments.is_empty() {
            return Err(Error::invalid(format!("contour '{name}' has no segments")));
        }
        for (i, seg) in segments.iter().enumerate() {
            if !seg.is_finite() {
                return Err(Error::invalid(format!(
                    "segment {i} of '{name}' is not finite"
                )));
            }
            if let Segment::Arc { radius, .. } = seg {
                if *radius <= 0.0 {
                    return Err(Error::invalid(format!(
                        "segment {i} of '{name}' has non-positive radius"
                    )));
                }
            }
            if seg.length().is_nan() || seg.length() <= 0.0 {
                return Err(Error::invalid(format!(
                    "segment {i} of '{name}' has zero length"
                )));
            }
        }
        for (i, pair) in segments.windows(2).enumerate() {
            let gap = pair[0].end().distance(pair[1].start());
            if gap >= CONTINUITY_TOL {
                return Err(Error::invalid(format!(
                    "gap of {gap:e} mm between segments {i} and {} of '{name}'",
                    i + 1
                )));
            }
        }
        if closed {
            let gap = segments[segments.len() - 1]
                .end()
                .distance(segments[0].start());
            if gap >= CONTINUITY_TOL {
                return Err(Error::invalid(format!(
                    "closed contour '{name}' has closure gap {gap:e} mm"
                )));
            }
        }
        let mut segments = segments;
        if closed {
            let area2: f64 = segments.iter().map(Segment::area2).sum();
            if area2 < 0.0 {
                segments = segments.iter().rev().map(Segment::reversed).collect();
            }
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for seg in &segments {
            starts.push(acc);
            acc += seg.length();
        }
        Ok(Contour {
            name,
            segments,
            closed,
            starts,
            length: acc,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Signed enclosed area (closed contours only; positive after
    /// normalisation to counter-clockwise).
    pub fn area(&self) -> f64 {
        self.segments.iter().map(Segment::area2).sum::<f64>() / 2.0
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = if self.closed {
            s.rem_euclid(self.length)
        } else {
            s.clamp(0.0, self.length)
        };
        let i = match self.starts.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (i, (s - self.starts[i]).min(self.segments[i].length()))
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        let (i, ls) = self.locate(s);
        self.segments[i].point_at(ls)
    }

    pub fn tangent_at(&self, s: f64) -> Vec2 {
        let (i, ls) = self.locate(s);
        self.segments[i].tangent_at(ls)
    }

    pub fn normal_at(&self, s: f64) -> Vec2 {
        let (i, ls) = self.locate(s);
        self.segments[i].normal_at(ls)
    }

    /// Sensor pose at edge pose `(r, theta)` relative to the contour point at
    /// arc length `s`.
    pub fn pose_at(&self, s: f64, r: f64, theta_deg: f64) -> Pose {
        let n = self.normal_at(s);
        let p = self.point_at(s) + n * r;
        Pose::new(p.x, p.y, n.angle_deg() + theta_deg)
    }

    /// The two segments meeting at the joint at the start of segment `i`, if
    /// there is one.
    fn joint_before(&self, i: usize) -> Option<(usize, usize)> {
        if i > 0 {
            Some((i - 1, i))
        } else if self.closed {
            Some((self.segments.len() - 1, 0))
        } else {
            None
        }
    }

    fn joint_tangents(&self, prev: usize, next: usize) -> (Vec2, Vec2) {
        let a = &self.segments[prev];
        (
            a.tangent_at(a.length()),
            self.segments[next].tangent_at(0.0),
        )
    }

    fn is_corner(&self, prev: usize, next: usize) -> bool {
        let (ta, tb) = self.joint_tangents(prev, next);
        ta.cross(tb).atan2(ta.dot(tb)).abs() > CORNER_TOL_RAD
    }

    pub fn closest(&self, p: Vec2) -> Closest {
        let mut best = (0usize, 0.0f64, self.segments[0].start(), f64::INFINITY);
        for (i, seg) in self.segments.iter().enumerate() {
            let (s, q) = seg.closest(p);
            let d = p.distance(q);
            if d < best.3 {
                best = (i, s, q, d);
            }
        }
        let (i, s, q, d) = best;
        let n = self.segments.len();
        let seg_len = self.segments[i].length();
        let joint = if s == 0.0 {
            self.joint_before(i)
        } else if s == seg_len {
            self.joint_before((i + 1) % n)
                .filter(|_| self.closed || i + 1 < n)
        } else {
            None
        };
        let own_normal = self.segments[i].normal_at(s);
        let (normal, corner, sign_dir) = match joint {
            Some((prev, next)) if self.is_corner(prev, next) => {
                let pa = &self.segments[prev];
                let n_prev = pa.normal_at(pa.length());
                let n_next = self.segments[next].normal_at(0.0);
                let normal = if prev < next { n_prev } else { n_next };
                (normal, true, n_prev + n_next)
            }
            _ => (own_normal, false, own_normal),
        };
        Closest {
            segment: i,
            local_s: s,
            arclength: self.starts[i] + s,
            point: q,
            distance: d,
            normal,
            corner,
            sign_dir,
        }
    }

    fn signed(&self, p: Vec2, c: &Closest) -> f64 {
        if c.distance == 0.0 {
            0.0
        } else if (p - c.point).dot(c.sign_dir) >= 0.0 {
            c.distance
        } else {
            -c.distance
        }
    }

    /// Signed distance to the contour: positive in free space, negative on
    /// the object side.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        let c = self.closest(p);
        self.signed(p, &c)
    }

    /// Ground-truth `(r, theta)` of a sensor pose.
    pub fn edge_pose_gt(&self, sensor: &Pose) -> EdgePoseGt {
        let p = sensor.position();
        let c = self.closest(p);
        EdgePoseGt {
            r: self.signed(p, &c),
            theta: wrap_deg(sensor.heading_deg - c.normal.angle_deg()),
            ambiguous: c.corner,
            arclength: c.arclength,
        }
    }

    /// Whether `p` lies beyond the final endpoint of an open contour.
    pub fn past_end(&self, p: Vec2) -> bool {
        if self.closed {
            return false;
        }
        let last = &self.segments[self.segments.len() - 1];
        let end = last.end();
        let c = self.closest(p);
        c.arclength >= self.length && (p - end).dot(last.tangent_at(last.length())) > 0.0
    }

    /// Non-smooth joints, in order of arc length.
    pub fn corners(&self) -> Vec<Corner> {
        (0..self.segments.len())
            .filter_map(|i| self.joint_before(i).map(|j| (i, j)))
            .filter(|&(_, (prev, next))| self.is_corner(prev, next))
            .map(|(i, (prev, next))| {
                let (ta, tb) = self.joint_tangents(prev, next);
                Corner {
                    arclength: self.starts[i],
                    point: self.segments[i].start(),
                    turning_deg: ta.cross(tb).atan2(ta.dot(tb)).to_degrees(),
                }
            })
            .collect()
    }

    /// Arc-length progress from `from` to `to`, wrapping across the seam of a
    /// closed contour to the shorter direction.
    pub fn arc_delta(&self, from: f64, to: f64) -> f64 {
        let d = to - from;
        if self.closed {
            let half = self.length / 2.0;
            (d + half).rem_euclid(self.length) - half
        } else {
            d
        }
    }

    /// Points spaced at most `step` mm apart along the contour, including
    /// both ends (for a closed contour the last equals the first).
    pub fn polyline(&self, step: f64) -> Vec<Vec2> {
        let mut pts = Vec::new();
        for seg in &self.segments {
            let len = seg.length();
            let n = (len / step).ceil().max(1.0) as usize;
            for k in 0..n {
                pts.push(seg.point_at(len * k as f64 / n as f64));
            }
        }
        let last = &self.segments[self.segments.len() - 1];
        pts.push(last.end());
        pts
    }

    /// Axis-aligned bounds `(min, max)` of a dense sampling of the contour.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        let pts = self.polyline(0.5);
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Rigidly moved copy: rotate about the origin by `rot_deg`, then
    /// translate by `t`.
    pub fn transformed(&self, rot_deg: f64, t: Vec2) -> Contour {
        Contour {
            name: self.name.clone(),
            segments: self
                .segments
                .iter()
                .map(|s| s.transformed(rot_deg, t))
                .collect(),
            closed: self.closed,
            starts: self.starts.clone(),
            length: self.length,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    fn square() -> Contour {
        shapes::make_irregular(
            "square",
            &[
                Vec2::new(0.0, 0.0),
                Vec2::new(10.0, 0.0),
                Vec2::new(10.0, 10.0),
                Vec2::new(0.0, 10.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_gaps_and_empty() {
        assert!(Contour::new("e", vec![], false).is_err());
        let segs = vec![
            Segment::line(Vec2::ZERO, Vec2::new(1.0, 0.0)),
            Segment::line(Vec2::new(1.0, 1e-6), Vec2::new(2.0, 0.0)),
        ];
        assert!(Contour::new("gap", segs, false).is_err());
        let open = vec![Segment::line(Vec2::ZERO, Vec2::new(1.0, 0.0))];
        assert!(Contour::new("unclosed", open, true).is_err());
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let cw = Contour::new(
            "cw",
            vec![
                Segment::line(Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)),
                Segment::line(Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0)),
                Segment::line(Vec2::new(1.0, 1.0), Vec2::new(0.0, 0.0)),
            ],
            true,
        )
        .unwrap();
        assert!(cw.area() > 0.0);
        assert!(cw.signed_distance(Vec2::new(0.3, 0.6)) < 0.0);
    }

    #[test]
    fn square_signs_and_corners() {
        let sq = square();
        assert!((sq.signed_distance(Vec2::new(5.0, 5.0)) + 5.0).abs() < 1e-12);
        assert!((sq.signed_distance(Vec2::new(13.0, 14.0)) - 5.0).abs() < 1e-12);
        assert!((sq.signed_distance(Vec2::new(5.0, -2.0)) - 2.0).abs() < 1e-12);
        let corners = sq.corners();
        assert_eq!(corners.len(), 4);
        for c in corners {
            assert!((c.turning_deg - 90.0).abs() < 1e-9);
        }
    }

    #[test]
    fn corner_closest_point_is_flagged_and_uses_lower_index() {
        let sq = square();
        // Beyond the (10, 0) vertex, between segment 0 (bottom) and 1 (right).
        let gt = sq.edge_pose_gt(&Pose::new(12.0, -2.0, 0.0));
        assert!(gt.ambiguous);
        assert!((gt.r - 8f64.sqrt()).abs() < 1e-12);
        // Bottom edge normal points down (-90 deg).
        assert!((gt.theta - 90.0).abs() < 1e-9);
        // Seam joint between last and first segment: lower index is 0.
        let gt = sq.edge_pose_gt(&Pose::new(-2.0, -2.0, 0.0));
        assert!(gt.ambiguous);
        assert!((gt.theta - 90.0).abs() < 1e-9);
    }

    #[test]
    fn point_and_pose_lookup() {
        let disk = shapes::make_disk(10.0).unwrap();
        let pose = disk.pose_at(0.0, 2.0, 15.0);
        let gt = disk.edge_pose_gt(&pose);
        assert!((gt.r - 2.0).abs() < 1e-12);
        assert!((gt.theta - 15.0).abs() < 1e-9);
    }

    #[test]
    fn arc_delta_wraps_on_closed() {
        let disk = shapes::make_disk(10.0).unwrap();
        let l = disk.length();
        assert!((disk.arc_delta(l - 1.0, 1.0) - 2.0).abs() < 1e-12);
        assert!((disk.arc_delta(1.0, l - 1.0) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn open_contour_end_detection() {
        let c = Contour::new(
            "bar",
            vec![Segment::line(Vec2::ZERO, Vec2::new(10.0, 0.0))],
            false,
        )
        .unwrap();
        assert!(c.past_end(Vec2::new(11.0, -1.0)));
        assert!(!c.past_end(Vec2::new(9.0, -1.0)));
        assert!(!c.past_end(Vec2::new(-1.0, 0.0)));
    }
}
