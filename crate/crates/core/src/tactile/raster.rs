use super::TactileFrame;
use crate::geometry::Vec2;

/// Mapping from sensor-frame millimetres to image pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RasterParams {
    /// Square image side in pixels.
    pub size: usize,
    /// Field of view across the image side, mm.
    pub fov_mm: f64,
    /// Gaussian blob standard deviation, pixels.
    pub blob_sigma: f64,
}

impl RasterParams {
    /// 44 mm field of view over `size` pixels; blob width scales with
    /// resolution (1.5 px at 128).
    pub fn for_size(size: usize) -> Self {
        RasterParams {
            size,
            fov_mm: 44.0,
            blob_sigma: 1.5 * size as f64 / 128.0,
        }
    }

    pub fn px_per_mm(&self) -> f64 {
        self.size as f64 / self.fov_mm
    }

    /// Pixel coordinates `(col, row)` of a sensor-frame point. The sensor
    /// origin maps to pixel `(size/2, size/2)`; +y points up the image.
    pub fn to_pixel(&self, p: Vec2) -> (f64, f64) {
        let c = (self.size / 2) as f64;
        let k = self.px_per_mm();
        (c + p.x * k, c - p.y * k)
    }
}

impl Default for RasterParams {
    fn default() -> Self {
        Self::for_size(128)
    }
}

/// Renders each pin as a unit-peak isotropic Gaussian, summing with
/// saturation at 1.
pub fn rasterize(pins: &[Vec2], params: &RasterParams) -> TactileFrame {
    assert!(params.blob_sigma > 0.0, "blob_sigma must be positive");
    let n = params.size;
    let mut acc = vec![0.0f64; n * n];
    let sigma = params.blob_sigma;
    let reach = (4.0 * sigma).ceil() as i64;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut gx = Vec::with_capacity(2 * reach as usize + 1);
    let mut gy = Vec::with_capacity(2 * reach as usize + 1);
    for p in pins {
        let (px, py) = params.to_pixel(*p);
        if !px.is_finite() || !py.is_finite() {
            continue;
        }
        let (cx, cy) = (px.round() as i64, py.round() as i64);
        let c0 = (cx - reach).max(0);
        let c1 = (cx + reach).min(n as i64 - 1);
        let r0 = (cy - reach).max(0);
        let r1 = (cy + reach).min(n as i64 - 1);
        if c0 > c1 || r0 > r1 {
            continue;
        }
        gx.clear();
        gx.extend((c0..=c1).map(|c| (-(c as f64 - px).powi(2) * inv).exp()));
        gy.clear();
        gy.extend((r0..=r1).map(|r| (-(r as f64 - py).powi(2) * inv).exp()));
        for (ri, r) in (r0..=r1).enumerate() {
            let row = &mut acc[r as usize * n..(r as usize + 1) * n];
            let wy = gy[ri];
            for (ci, c) in (c0..=c1).enumerate() {
                row[c as usize] += wy * gx[ci];
            }
        }
    }
    TactileFrame::from_pixels(n, n, acc.into_iter().map(|v| v.min(1.0) as f32).collect())
}
