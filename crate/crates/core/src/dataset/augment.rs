use rand::Rng;

use crate::rng;
use crate::tactile::TactileFrame;

/// Largest shift as a fraction of each image dimension.
pub const MAX_SHIFT_FRACTION: f64 = 0.02;

const SHIFT_STREAM: u64 = 0xa119;

/// Bilinear translation of `frame` by `dx` columns (positive right) and
/// `dy` rows (positive down) into `out`, zero-filling uncovered pixels.
pub fn shift_into(frame: &TactileFrame, dx: f64, dy: f64, out: &mut [f64]) {
    let (h, w) = (frame.height(), frame.width());
    assert_eq!(out.len(), h * w, "output buffer does not match frame");
    let src = frame.pixels();
    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            0.0
        } else {
            src[r as usize * w + c as usize] as f64
        }
    };
    // Output (r, c) samples the input at (r - dy, c - dx).
    let (fx, fy) = ((-dx).floor(), (-dy).floor());
    let (ax, ay) = (-dx - fx, -dy - fy);
    let (ox, oy) = (fx as isize, fy as isize);
    for r in 0..h {
        for c in 0..w {
            let (r0, c0) = (r as isize + oy, c as isize + ox);
            out[r * w + c] = (1.0 - ay) * ((1.0 - ax) * at(r0, c0) + ax * at(r0, c0 + 1))
                + ay * ((1.0 - ax) * at(r0 + 1, c0) + ax * at(r0 + 1, c0 + 1));
        }
    }
}

pub fn shift_frame(frame: &TactileFrame, dx: f64, dy: f64) -> TactileFrame {
    let mut out = vec![0.0; frame.height() * frame.width()];
    shift_into(frame, dx, dy, &mut out);
    TactileFrame::from_pixels(
        frame.height(),
        frame.width(),
        out.into_iter().map(|v| v as f32).collect(),
    )
}

/// Uniform shift in `±2%` of each dimension.
pub fn random_shift<R: Rng + ?Sized>(height: usize, width: usize, rng: &mut R) -> (f64, f64) {
    let mx = MAX_SHIFT_FRACTION * width as f64;
    let my = MAX_SHIFT_FRACTION * height as f64;
    (rng.random_range(-mx..=mx), rng.random_range(-my..=my))
}

/// Randomly shifted copy of `frame`; the shift is a function of `seed`.
pub fn augment_shift(frame: &TactileFrame, seed: u64) -> TactileFrame {
    let (dx, dy) = random_shift(
        frame.height(),
        frame.width(),
        &mut rng::stream(seed, &[SHIFT_STREAM]),
    );
    shift_frame(frame, dx, dy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> TactileFrame {
        TactileFrame::from_pixels(4, 5, (0..20).map(|i| i as f32 / 20.0).collect())
    }

    #[test]
    fn zero_shift_is_identity() {
        assert_eq!(shift_frame(&ramp(), 0.0, 0.0), ramp());
    }

    #[test]
    fn integer_shift_moves_pixels() {
        let f = ramp();
        let s = shift_frame(&f, 1.0, 1.0);
        assert_eq!(s.get(0, 0), 0.0);
        assert_eq!(s.get(1, 1), f.get(0, 0));
        assert_eq!(s.get(3, 4), f.get(2, 3));
    }

    #[test]
    fn shifts_stay_in_bounds() {
        let mut r = rng::stream(1, &[]);
        for _ in 0..1000 {
            let (dx, dy) = random_shift(128, 128, &mut r);
            assert!(dx.abs() <= 2.56 && dy.abs() <= 2.56);
        }
    }
}
