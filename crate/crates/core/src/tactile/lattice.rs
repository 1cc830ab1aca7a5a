use crate::geometry::Vec2;

/// Rest positions of the sensor pins in the sensor frame (mm).
#[derive(Clone, Debug, PartialEq)]
pub struct PinLattice {
    positions: Vec<Vec2>,
    ring_count: usize,
}

impl PinLattice {
    /// Hexagonal lattice: one centre pin plus `6k` pins on ring `k`.
    pub fn hexagonal(ring_count: usize, pitch: f64) -> Self {
        let mut positions = vec![Vec2::ZERO];
        for k in 1..=ring_count {
            let corner = |j: usize| Vec2::from_angle_deg(60.0 * j as f64) * (k as f64 * pitch);
            for j in 0..6 {
                let (a, b) = (corner(j), corner(j + 1));
                for m in 0..k {
                    positions.push(a + (b - a) * (m as f64 / k as f64));
                }
            }
        }
        PinLattice {
            positions,
            ring_count,
        }
    }

    /// Arbitrary pin set; `ring_count` is informational only.
    pub fn from_positions(positions: Vec<Vec2>, ring_count: usize) -> Self {
        PinLattice {
            positions,
            ring_count,
        }
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn ring_count(&self) -> usize {
        self.ring_count
    }

    pub fn rotated(&self, deg: f64) -> Self {
        PinLattice {
            positions: self.positions.iter().map(|p| p.rotated_deg(deg)).collect(),
            ring_count: self.ring_count,
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.positions.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// `lattice_init`: hexagonal pin lattice with `ring_count` rings at `pitch` mm.
pub fn lattice_init(ring_count: usize, pitch: f64) -> PinLattice {
    PinLattice::hexagonal(ring_count, pitch)
}
