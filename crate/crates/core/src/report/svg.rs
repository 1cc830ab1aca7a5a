use std::fmt::Write;

use crate::geometry::{Contour, Vec2};
use crate::servo::Trajectory;

pub const PX_PER_MM: f64 = 2.0;
/// Heading ticks are drawn on every this-many steps.
pub const TICK_EVERY: usize = 5;
const MARGIN_MM: f64 = 15.0;
const TICK_MM: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathPoint {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
}

/// Sensed poses of each step followed by the final pose.
pub fn path_from_trajectory(traj: &Trajectory) -> Vec<PathPoint> {
    traj.records
        .iter()
        .map(|r| r.pose)
        .chain(std::iter::once(traj.final_pose))
        .map(|p| PathPoint {
            x: p.x,
            y: p.y,
            heading_deg: p.heading_deg,
        })
        .collect()
}

struct Frame {
    lo: Vec2,
    hi: Vec2,
}

impl Frame {
    fn px(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.lo.x) * PX_PER_MM, (self.hi.y - p.y) * PX_PER_MM)
    }

    fn points(&self, pts: impl Iterator<Item = Vec2>) -> String {
        let mut s = String::new();
        for p in pts {
            let (x, y) = self.px(p);
            if !s.is_empty() {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }
}

/// Contour outline in black, the sensor path in colour, heading ticks every
/// [`TICK_EVERY`] steps and a start marker. The output depends only on the
/// inputs.
pub fn trajectory_svg(contour: &Contour, path: &[PathPoint], title: &str) -> String {
    let outline = contour.polyline(0.5);
    let (mut lo, mut hi) = contour.bounds();
    for p in path {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let frame = Frame {
        lo: lo - Vec2::new(MARGIN_MM, MARGIN_MM),
        hi: hi + Vec2::new(MARGIN_MM, MARGIN_MM),
    };
    let w = (frame.hi.x - frame.lo.x) * PX_PER_MM;
    let h = (frame.hi.y - frame.lo.y) * PX_PER_MM;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
        frame.points(outline.into_iter())
    );
    if !path.is_empty() {
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="#d62728" stroke-width="1" points="{}"/>"##,
            frame.points(path.iter().map(|p| Vec2::new(p.x, p.y)))
        );
        for p in path.iter().step_by(TICK_EVERY) {
            let a = Vec2::new(p.x, p.y);
            let b = a + Vec2::from_angle_deg(p.heading_deg) * TICK_MM;
            let ((x1, y1), (x2, y2)) = (frame.px(a), frame.px(b));
            let _ = writeln!(
                s,
                r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#1f77b4" stroke-width="1"/>"##
            );
        }
        let (x, y) = frame.px(Vec2::new(path[0].x, path[0].y));
        let _ = writeln!(
            s,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#2ca02c"/>"##
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn scale_and_y_flip() {
        let disk = shapes::make_disk(10.0).unwrap();
        let svg = trajectory_svg(&disk, &[], "d");
        // 20 mm + 2 * 15 mm margin, at 2 px/mm.
        assert!(
            svg.starts_with(r#"<svg xmlns="http://www.w3.org/2000/svg" width="100" height="100""#)
        );
        let frame = Frame {
            lo: Vec2::new(-25.0, -25.0),
            hi: Vec2::new(25.0, 25.0),
        };
        assert_eq!(frame.px(Vec2::new(0.0, 10.0)), (50.0, 30.0));
    }

    #[test]
    fn ticks_every_fifth_point() {
        let disk = shapes::make_disk(10.0).unwrap();
        let path: Vec<_> = (0..12)
            .map(|i| PathPoint {
                x: i as f64,
                y: 10.0,
                heading_deg: 90.0,
            })
            .collect();
        let svg = trajectory_svg(&disk, &path, "a<b");
        assert_eq!(svg.matches("<line ").count(), 3);
        assert!(svg.contains("<title>a&lt;b</title>"));
        assert_eq!(svg, trajectory_svg(&disk, &path, "a<b"));
    }
}
