use rand::Rng;

use super::{PinLattice, ShearState};
use crate::geometry::{Contour, Pose, Vec2};

/// Parameters of the pin displacement model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformParams {
    /// Sensing pad radius, mm.
    pub pad_radius: f64,
    /// Displacement per mm of indentation at full support (dimensionless).
    pub stiffness: f64,
    /// Half-width of the smooth object/free-space transition, mm.
    pub edge_width: f64,
    /// Indentation at which shear is applied at full strength, mm.
    pub nominal_depth: f64,
    /// Restrict support to the dome's contact disk at the current depth.
    pub contact_patch: bool,
    /// Scale of the saturating depth response, mm; infinite for a linear
    /// response.
    pub saturation_depth: f64,
}

impl Default for DeformParams {
    fn default() -> Self {
        DeformParams {
            pad_radius: 20.0,
            stiffness: 0.6,
            edge_width: 2.0,
            nominal_depth: 3.5,
            contact_patch: true,
            saturation_depth: 0.5,
        }
    }
}

/// Per-tap stand-in for small out-of-plane tilt: anisotropic scaling of the
/// displacement field plus a small global pin translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TapJitter {
    pub scale: Vec2,
    pub offset: Vec2,
}

impl TapJitter {
    pub const NONE: TapJitter = TapJitter {
        scale: Vec2::new(1.0, 1.0),
        offset: Vec2::ZERO,
    };

    /// Scale in `[0.995, 1.005]` per axis and offset uniform in a 0.2 mm disk.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let scale = Vec2::new(
            rng.random_range(0.995..=1.005),
            rng.random_range(0.995..=1.005),
        );
        let radius = 0.2 * rng.random::<f64>().sqrt();
        let offset = Vec2::from_angle_deg(rng.random_range(0.0..360.0)) * radius;
        TapJitter { scale, offset }
    }
}

impl Default for TapJitter {
    fn default() -> Self {
        TapJitter::NONE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Deformation {
    pub pins: Vec<Vec2>,
    /// Total contact weight; zero means the pad touches nothing.
    pub contact: f64,
}

impl Deformation {
    pub fn in_contact(&self) -> bool {
        self.contact > 0.0
    }
}

/// 1 on the object side, 0 in free space, smooth across `±width` of the edge.
fn support(sd: f64, width: f64) -> f64 {
    let t = ((width - sd) / (2.0 * width)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

impl DeformParams {
    /// Radius of the flat contact disk of the hemispherical pad at `depth`.
    pub fn contact_radius(&self, depth: f64) -> f64 {
        let d = depth.clamp(0.0, self.pad_radius);
        (2.0 * self.pad_radius * d - d * d).sqrt()
    }

    /// Indentation driving pin displacement. Saturating in `depth` with
    /// scale `saturation_depth` and equal to `depth` at `nominal_depth`.
    pub fn effective_depth(&self, depth: f64) -> f64 {
        let ds = self.saturation_depth;
        if ds.is_infinite() {
            depth
        } else {
            self.nominal_depth * (depth / ds).tanh() / (self.nominal_depth / ds).tanh()
        }
    }
}

fn dome_falloff(radius: f64, pad_radius: f64) -> f64 {
    if radius >= pad_radius {
        0.0
    } else {
        (std::f64::consts::FRAC_PI_2 * radius / pad_radius).cos()
    }
}

/// Displaced pin positions (sensor frame) for the sensor at `sensor` pressed
/// `depth` mm into the plane containing `contour`'s object.
///
/// Pins displace radially from the support-weighted contact centroid by
/// `stiffness * effective_depth(depth) * weight * |p - c| / pad_radius`, where the weight is
/// the product of object support, a cosine dome falloff and (with
/// `contact_patch`) a soft cut-off at the indenter contact radius. In contact, all
/// pins also translate by the shear scaled by `depth / nominal_depth`.
pub fn deform(
    lattice: &PinLattice,
    contour: &Contour,
    sensor: &Pose,
    depth: f64,
    shear: &ShearState,
    jitter: &TapJitter,
    params: &DeformParams,
) -> Deformation {
    let rest = lattice.positions();
    if depth <= 0.0 {
        return Deformation {
            pins: rest.to_vec(),
            contact: 0.0,
        };
    }
    let patch = if params.contact_patch {
        params.contact_radius(depth)
    } else {
        f64::INFINITY
    };
    let weights: Vec<f64> = rest
        .iter()
        .map(|&p| {
            let falloff = dome_falloff(p.norm(), params.pad_radius)
                * support(p.norm() - patch, params.edge_width);
            if falloff == 0.0 {
                return 0.0;
            }
            let sd = contour.signed_distance(sensor.to_world(p));
            support(sd, params.edge_width) * falloff
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Deformation {
            pins: rest.to_vec(),
            contact: 0.0,
        };
    }
    let centroid = rest
        .iter()
        .zip(&weights)
        .fold(Vec2::ZERO, |acc, (&p, &w)| acc + p * w)
        * (1.0 / total);
    let gain = params.stiffness * params.effective_depth(depth) / params.pad_radius;
    let translation = shear.s * (depth / params.nominal_depth) + jitter.offset;
    let pins = rest
        .iter()
        .zip(&weights)
        .map(|(&p, &w)| {
            let d = (p - centroid) * (gain * w);
            p + Vec2::new(d.x * jitter.scale.x, d.y * jitter.scale.y) + translation
        })
        .collect();
    Deformation {
        pins,
        contact: total,
    }
}

/// `deform_pins` without tilt jitter.
pub fn deform_pins(
    lattice: &PinLattice,
    contour: &Contour,
    sensor: &Pose,
    depth: f64,
    shear: &ShearState,
    params: &DeformParams,
) -> Vec<Vec2> {
    deform(
        lattice,
        contour,
        sensor,
        depth,
        shear,
        &TapJitter::NONE,
        params,
    )
    .pins
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use crate::tactile::lattice_init;

    fn straight_edge() -> Contour {
        // Object below y = 0, edge traversed toward -x so the outward
        // normal is +y.
        shapes::make_irregular(
            "slab",
            &[
                Vec2::new(-500.0, 0.0),
                Vec2::new(-500.0, -500.0),
                Vec2::new(500.0, -500.0),
                Vec2::new(500.0, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_depth_zero_shear_is_identity() {
        let lattice = lattice_init(6, 3.0);
        let disk = shapes::make_disk(52.5).unwrap();
        let pins = deform_pins(
            &lattice,
            &disk,
            &Pose::new(0.0, 52.5, 90.0),
            0.0,
            &ShearState::zero(),
            &DeformParams::default(),
        );
        assert_eq!(pins, lattice.positions());
    }

    #[test]
    fn object_half_moves_more_than_free_half() {
        let lattice = lattice_init(6, 3.0);
        let disk = shapes::make_disk(52.5).unwrap();
        // Sensor on the 12 o'clock edge, +x along the outward normal: the
        // object lies at negative sensor x.
        let pins = deform_pins(
            &lattice,
            &disk,
            &Pose::new(0.0, 52.5, 90.0),
            3.5,
            &ShearState::zero(),
            &DeformParams::default(),
        );
        let (mut obj, mut free) = (Vec::new(), Vec::new());
        for (rest, moved) in lattice.positions().iter().zip(&pins) {
            let m = moved.distance(*rest);
            if rest.x < 0.0 {
                obj.push(m);
            } else if rest.x > 0.0 {
                free.push(m);
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&obj) > mean(&free),
            "object {} free {}",
            mean(&obj),
            mean(&free)
        );
        assert!(mean(&obj) > 0.1);
    }

    #[test]
    fn heading_rotation_rotates_field_in_sensor_frame() {
        let lattice = lattice_init(6, 3.0);
        let edge = straight_edge();
        let params = DeformParams::default();
        let shear = ShearState::zero();
        let base = Pose::new(3.0, 1.0, 75.0);
        let turned = Pose {
            heading_deg: base.heading_deg + 20.0,
            ..base
        };
        // Same world pin sites: the turned sensor with the rest lattice
        // against the base sensor with the lattice pre-rotated by +20 deg.
        let d1 = deform_pins(&lattice, &edge, &turned, 3.0, &shear, &params);
        let rotated = lattice.rotated(20.0);
        let d2 = deform_pins(&rotated, &edge, &base, 3.0, &shear, &params);
        for i in 0..lattice.len() {
            let disp1 = d1[i] - lattice.positions()[i];
            let disp2 = d2[i] - rotated.positions()[i];
            assert!((disp1 - disp2.rotated_deg(-20.0)).norm() < 1e-6);
        }
        assert!(d1
            .iter()
            .zip(lattice.positions())
            .any(|(a, b)| a.distance(*b) > 0.05));
    }

    #[test]
    fn free_space_is_rest_even_with_shear() {
        let lattice = lattice_init(6, 3.0);
        let disk = shapes::make_disk(52.5).unwrap();
        let mut shear = ShearState::zero();
        shear.s = Vec2::new(1.0, 0.5);
        let d = deform(
            &lattice,
            &disk,
            &Pose::new(0.0, 200.0, 0.0),
            3.5,
            &shear,
            &TapJitter::NONE,
            &DeformParams::default(),
        );
        assert!(!d.in_contact());
        assert_eq!(d.pins, lattice.positions());
    }

    #[test]
    fn displacement_energy_is_monotone_in_depth() {
        let lattice = lattice_init(6, 3.0);
        let disk = shapes::make_disk(52.5).unwrap();
        let pose = Pose::new(0.0, 52.5, 90.0);
        let mut shear = ShearState::zero();
        shear.s = Vec2::new(0.4, -0.2);
        let mut last = -1.0;
        for k in 0..=50 {
            let depth = 5.0 * k as f64 / 50.0;
            let pins = deform_pins(
                &lattice,
                &disk,
                &pose,
                depth,
                &shear,
                &DeformParams::default(),
            );
            assert_eq!(pins.len(), lattice.len());
            let energy: f64 = pins
                .iter()
                .zip(lattice.positions())
                .map(|(a, b)| (*a - *b).norm_sq())
                .sum();
            assert!(energy >= last);
            last = energy;
        }
    }

    #[test]
    fn effective_depth_saturates() {
        let p = DeformParams::default();
        let tanh = |x: f64| (1.0 - (-2.0 * x).exp()) / (1.0 + (-2.0 * x).exp());
        let (ds, dn) = (p.saturation_depth, p.nominal_depth);
        for d in [0.0, 0.01, 0.5, 1.5, 3.5, 6.0] {
            let want = dn * tanh(d / ds) / tanh(dn / ds);
            assert!((p.effective_depth(d) - want).abs() < 1e-12);
        }
        assert!((p.effective_depth(dn) - dn).abs() < 1e-12);
        assert!(p.effective_depth(6.0) > p.effective_depth(3.5));
        assert!(p.effective_depth(6.0) < dn / tanh(dn / ds));
        let linear = DeformParams {
            saturation_depth: f64::INFINITY,
            ..p
        };
        assert_eq!(linear.effective_depth(1.5), 1.5);
    }
}
