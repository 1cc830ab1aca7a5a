use std::io::{self, Write};

use crate::geometry::Vec2;

/// Grey-scale tactile image, row-major, intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TactileFrame {
    height: usize,
    width: usize,
    pixels: Vec<f32>,
}

impl TactileFrame {
    pub fn zeros(height: usize, width: usize) -> Self {
        TactileFrame {
            height,
            width,
            pixels: vec![0.0; height * width],
        }
    }

    /// Wraps raw pixels. Panics if the length does not match.
    pub fn from_pixels(height: usize, width: usize, pixels: Vec<f32>) -> Self {
        assert_eq!(
            pixels.len(),
            height * width,
            "pixel count does not match frame shape"
        );
        TactileFrame {
            height,
            width,
            pixels,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f32] {
        &mut self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.pixels[row * self.width + col]
    }

    pub fn is_valid(&self) -> bool {
        self.pixels
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v))
    }

    /// Root-mean-square pixel difference to `other`.
    pub fn rms_diff(&self, other: &TactileFrame) -> f64 {
        let sum: f64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| {
                let d = (*a - *b) as f64;
                d * d
            })
            .sum();
        (sum / self.pixels.len() as f64).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.pixels.iter().map(|&v| v as f64).sum()
    }

    /// `(row, col)` of the brightest pixel; ties go to the first in scan order.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.pixels.iter().enumerate() {
            if v > self.pixels[best] {
                best = i;
            }
        }
        (best / self.width, best % self.width)
    }

    /// Intensity-weighted centroid as `(col, row)` in pixel units.
    pub fn centroid(&self) -> Vec2 {
        let mut acc = Vec2::ZERO;
        let mut mass = 0.0;
        for r in 0..self.height {
            for c in 0..self.width {
                let v = self.get(r, c) as f64;
                acc += Vec2::new(c as f64, r as f64) * v;
                mass += v;
            }
        }
        acc * (1.0 / mass)
    }

    /// Binary PGM (P5, 8-bit).
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        w.write_all(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_size() {
        let mut f = TactileFrame::zeros(4, 3);
        f.pixels_mut()[0] = 1.0;
        let mut buf = Vec::new();
        f.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n3 4\n255\n"));
        assert_eq!(buf.len(), 11 + 12);
        assert_eq!(buf[11], 255);
    }
}
