//! The test objects: disk, volute lamina, spiral ridge, teardrop, clover and
//! an irregular polyline with one sharp tip.

use rand::Rng;

use super::{Contour, Segment, Vec2};
use crate::error::{Error, Result};
use crate::rng;

/// Radius of the training disk (105 mm diameter).
pub const DISK_RADIUS: f64 = 52.5;

/// Circle centred on the origin, starting (arc length 0) at 12 o'clock.
pub fn make_disk(radius: f64) -> Result<Contour> {
    if radius.is_nan() || radius <= 0.0 || !radius.is_finite() {
        return Err(Error::invalid(format!(
            "disk radius must be positive, got {radius}"
        )));
    }
    Contour::new(
        "disk",
        vec![Segment::arc(Vec2::ZERO, radius, 90.0, 360.0)],
        true,
    )
}

/// Four tangent-continuous 90 degree arcs of radii 30, 40, 50 and 60 mm,
/// closed by a straight segment that leaves one convex and one concave
/// corner.
pub fn make_volute() -> Contour {
    let mut segs = Vec::new();
    let mut start = Vec2::new(30.0, 0.0);
    for (k, radius) in [30.0, 40.0, 50.0, 60.0].into_iter().enumerate() {
        let start_deg = 90.0 * k as f64;
        let center = start - Vec2::from_angle_deg(start_deg) * radius;
        let seg = Segment::arc(center, radius, start_deg, 90.0);
        start = seg.end();
        segs.push(seg);
    }
    let first = segs[0].start();
    segs.push(Segment::line(start, first));
    Contour::new("volute", segs, true).expect("volute construction")
}

/// Open spiral of five tangent-continuous 180 degree arcs with radii 20 to
/// 60 mm. The object lies on the inner (left) side.
pub fn make_spiral_ridge() -> Contour {
    let mut segs = Vec::new();
    let mut start = Vec2::new(20.0, 0.0);
    for (k, radius) in [20.0, 30.0, 40.0, 50.0, 60.0].into_iter().enumerate() {
        let start_deg = 180.0 * k as f64;
        let center = start - Vec2::from_angle_deg(start_deg) * radius;
        let seg = Segment::arc(center, radius, start_deg, 180.0);
        start = seg.end();
        segs.push(seg);
    }
    Contour::new("spiral", segs, false).expect("spiral construction")
}

/// A large arc joined by two tangent lines to a sharp tip at 12 o'clock.
pub fn make_teardrop() -> Contour {
    teardrop(35.0, 80.0)
}

fn teardrop(radius: f64, tip_distance: f64) -> Contour {
    let gamma = (radius / tip_distance).acos().to_degrees();
    let tip = Vec2::new(0.0, tip_distance);
    let arc = Segment::arc(Vec2::ZERO, radius, 90.0 + gamma, 360.0 - 2.0 * gamma);
    let right = arc.end();
    let left = arc.start();
    Contour::new(
        "teardrop",
        vec![arc, Segment::line(right, tip), Segment::line(tip, left)],
        true,
    )
    .expect("teardrop construction")
}

/// Four circular lobes joined by concave fillets; tangent-continuous.
pub fn make_clover() -> Contour {
    clover(30.0, 25.0, 8.0)
}

fn clover(lobe_offset: f64, lobe_radius: f64, fillet_radius: f64) -> Contour {
    let c = lobe_offset;
    let rr = lobe_radius + fillet_radius;
    let s2 = std::f64::consts::SQRT_2;
    let d = (s2 * c + (2.0 * c * c - 4.0 * (c * c - rr * rr)).sqrt()) / 2.0;
    let lobe = |k: usize| Vec2::from_angle_deg(90.0 * k as f64) * c;
    let fillet = |k: usize| Vec2::from_angle_deg(45.0 + 90.0 * k as f64) * d;
    let mut segs = Vec::new();
    for k in 0..4 {
        let ck = lobe(k);
        let a0 = (fillet((k + 3) % 4) - ck).angle_deg();
        let a1 = (fillet(k) - ck).angle_deg();
        segs.push(Segment::arc(
            ck,
            lobe_radius,
            a0,
            (a1 - a0).rem_euclid(360.0),
        ));
        let fk = fillet(k);
        let b0 = (ck - fk).angle_deg();
        let b1 = (lobe((k + 1) % 4) - fk).angle_deg();
        segs.push(Segment::arc(
            fk,
            fillet_radius,
            b0,
            -(b0 - b1).rem_euclid(360.0),
        ));
    }
    Contour::new("clover", segs, true).expect("clover construction")
}

/// Closed polyline through `vertices`. Rejects fewer than three vertices,
/// repeated vertices and self-intersections.
pub fn make_irregular(name: &str, vertices: &[Vec2]) -> Result<Contour> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::invalid(
            "irregular contour needs at least 3 vertices",
        ));
    }
    let edges: Vec<(Vec2, Vec2)> = (0..n)
        .map(|i| (vertices[i], vertices[(i + 1) % n]))
        .collect();
    for (i, &(a, b)) in edges.iter().enumerate() {
        if a.distance(b) == 0.0 {
            return Err(Error::invalid(format!("repeated vertex at index {i}")));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if !adjacent && segments_intersect(edges[i], edges[j]) {
                return Err(Error::invalid(format!(
                    "polyline self-intersects (edges {i} and {j})"
                )));
            }
        }
    }
    let segs = edges
        .into_iter()
        .map(|(a, b)| Segment::line(a, b))
        .collect();
    Contour::new(name, segs, true)
}

fn segments_intersect((p1, p2): (Vec2, Vec2), (q1, q2): (Vec2, Vec2)) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Vec2, b: Vec2, p: Vec2| {
        (b - a).cross(p - a) == 0.0
            && p.x >= a.x.min(b.x)
            && p.x <= a.x.max(b.x)
            && p.y >= a.y.min(b.y)
            && p.y <= a.y.max(b.y)
    };
    on(p1, p2, q1) || on(p1, p2, q2) || on(q1, q2, p1) || on(q1, q2, p2)
}

/// Vertices of a crescent ("banana") with a blunt end and one sharp tip,
/// with small seeded radial jitter along both long edges.
pub fn banana_vertices(seed: u64) -> Vec<Vec2> {
    let mut rng = rng::stream(seed, &[0xba4a4a]);
    let polar = |rho: f64, deg: f64| Vec2::from_angle_deg(deg) * rho;
    let mut v = Vec::new();
    let (outer, inner, mid) = (75.0, 55.0, 65.0);
    let (a0, a1) = (200.0, 330.0);
    let steps = 26;
    for k in 0..=steps {
        let a = a0 + (a1 - a0) * k as f64 / steps as f64;
        let jitter = if k == 0 || k == steps {
            0.0
        } else {
            rng.random_range(-0.6..0.6)
        };
        v.push(polar(outer + jitter, a));
    }
    v.push(polar(mid, 342.0));
    for k in (0..=steps).rev() {
        let a = a0 + (a1 - a0) * k as f64 / steps as f64;
        let jitter = if k == 0 || k == steps {
            0.0
        } else {
            rng.random_range(-0.6..0.6)
        };
        v.push(polar(inner + jitter, a));
    }
    // Blunt cap: half circle around the end of the centre line.
    let cap_center = polar(mid, a0);
    let outward = Vec2::from_angle_deg(a0);
    let back = -Vec2::from_angle_deg(a0).perp();
    for k in 1..6 {
        let t = 180.0 * k as f64 / 6.0;
        let dir = (-outward).rotated_deg(t);
        v.push(cap_center + dir * 10.0 + back * 3.0 * (t.to_radians().sin()));
    }
    v
}

/// The irregular object (banana analogue) for a given seed.
pub fn make_banana(seed: u64) -> Contour {
    make_irregular("irregular", &banana_vertices(seed)).expect("banana construction")
}

/// Looks up a built-in object by name.
pub fn by_name(name: &str) -> Result<Contour> {
    match name {
        "disk" => make_disk(DISK_RADIUS),
        "volute" => Ok(make_volute()),
        "spiral" => Ok(make_spiral_ridge()),
        "teardrop" | "foil" => Ok(make_teardrop()),
        "clover" => Ok(make_clover()),
        "irregular" | "banana" => Ok(make_banana(1)),
        other => Err(Error::invalid(format!("unknown object '{other}'"))),
    }
}

pub const BUILTIN_OBJECTS: [&str; 6] = [
    "disk",
    "volute",
    "spiral",
    "teardrop",
    "clover",
    "irregular",
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_lengths() {
        let d = make_disk(52.5).unwrap();
        assert!(d.is_closed());
        assert!((d.length() - 329.867_228_626_928_5).abs() < 1e-9);
        assert!((make_disk(1.0).unwrap().length() - 2.0 * PI).abs() < 1e-12);
        assert!(make_disk(0.0).is_err());
        assert!(make_disk(-1.0).is_err());
    }

    #[test]
    fn volute_radii_and_corners() {
        let v = make_volute();
        let mut radii: Vec<f64> = v
            .segments()
            .iter()
            .filter_map(|s| match s {
                Segment::Arc { radius, .. } => Some(*radius),
                _ => None,
            })
            .collect();
        radii.sort_by(f64::total_cmp);
        assert_eq!(radii, vec![30.0, 40.0, 50.0, 60.0]);
        let corners = v.corners();
        assert_eq!(corners.len(), 2);
        let mut turns: Vec<f64> = corners.iter().map(|c| c.turning_deg.round()).collect();
        turns.sort_by(f64::total_cmp);
        assert_eq!(turns, vec![-90.0, 90.0]);
        assert!(v.area() > 0.0);
    }

    #[test]
    fn spiral_radius_increases_along_length() {
        let s = make_spiral_ridge();
        assert!(!s.is_closed());
        let radii: Vec<f64> = s
            .segments()
            .iter()
            .map(|seg| match seg {
                Segment::Arc {
                    radius, sweep_deg, ..
                } => {
                    assert_eq!(*sweep_deg, 180.0);
                    *radius
                }
                _ => panic!("spiral has only arcs"),
            })
            .collect();
        assert_eq!(radii, vec![20.0, 30.0, 40.0, 50.0, 60.0]);
        assert!(s.corners().is_empty());
    }

    #[test]
    fn teardrop_has_one_sharp_corner() {
        let t = make_teardrop();
        let corners = t.corners();
        assert_eq!(corners.len(), 1);
        assert!(corners[0].turning_deg > 90.0);
        assert!((corners[0].point - Vec2::new(0.0, 80.0)).norm() < 1e-9);
    }

    #[test]
    fn clover_is_smooth_and_closed() {
        let c = make_clover();
        assert!(c.is_closed());
        assert!(c.corners().is_empty());
        assert_eq!(c.segments().len(), 8);
        assert!(c.signed_distance(Vec2::ZERO) < 0.0);
        // A fillet region just outside the waist is free space.
        assert!(c.signed_distance(Vec2::from_angle_deg(45.0) * 40.0) > 0.0);
    }

    #[test]
    fn irregular_square_has_four_right_angle_corners() {
        let sq = make_irregular(
            "square",
            &[
                Vec2::new(0.0, 0.0),
                Vec2::new(0.0, 20.0),
                Vec2::new(20.0, 20.0),
                Vec2::new(20.0, 0.0),
            ],
        )
        .unwrap();
        let corners = sq.corners();
        assert_eq!(corners.len(), 4);
        assert!(corners.iter().all(|c| (c.turning_deg - 90.0).abs() < 1e-9));
    }

    #[test]
    fn irregular_rejects_self_intersection() {
        let bowtie = [
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 10.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(0.0, 10.0),
        ];
        assert!(make_irregular("bowtie", &bowtie).is_err());
        assert!(make_irregular("short", &bowtie[..2]).is_err());
    }

    #[test]
    fn banana_has_a_sharp_tip() {
        let b = make_banana(1);
        let max_turn = b
            .corners()
            .iter()
            .map(|c| c.turning_deg)
            .fold(f64::MIN, f64::max);
        assert!(max_turn > 90.0, "max turning {max_turn}");
        assert_eq!(make_banana(1), make_banana(1));
        assert_ne!(make_banana(1), make_banana(2));
    }
}
