//! Optical tactile sensor model: a hexagonal pin lattice under a compliant
//! pad, deformed by contact with a planar object and imaged as Gaussian
//! blobs on a dark field.

mod deform;
mod frame;
mod lattice;
mod raster;
mod shear;

use rand::Rng;
use rand_distr::{Distribution, Normal};

pub use deform::{deform, deform_pins, DeformParams, Deformation, TapJitter};
pub use frame::TactileFrame;
pub use lattice::{lattice_init, PinLattice};
pub use raster::{rasterize, RasterParams};
pub use shear::{update_shear, ShearState};

use crate::error::{Error, Result};
use crate::geometry::{Contour, Pose};

/// How the sensor meets the surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Discrete press-and-release contacts, free of shear.
    Tap,
    /// Continuous contact at fixed depth; motion builds up surface shear.
    Slide,
}

impl Mode {
    pub fn code(self) -> u8 {
        match self {
            Mode::Tap => 0,
            Mode::Slide => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Mode::Tap),
            1 => Some(Mode::Slide),
            _ => None,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Tap => "tap",
            Mode::Slide => "slide",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tap" => Ok(Mode::Tap),
            "slide" => Ok(Mode::Slide),
            _ => Err(Error::invalid(format!(
                "unknown mode {s:?} (expected tap or slide)"
            ))),
        }
    }
}

/// Number of frames kept around the peak of a tap.
pub const WINDOW: usize = 7;

/// Tap and slide kinematics (mm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactParams {
    /// Start height above the surface.
    pub depth_above: f64,
    /// Downward travel of a tap.
    pub press: f64,
    pub frames_per_tap: usize,
    /// Added indentation (positive = deeper), for depth-robustness runs.
    pub depth_offset: f64,
    /// Downward travel from the start height when sliding.
    pub slide_drop: f64,
    /// Frames rendered per sliding segment; the last is used.
    pub slide_frames: usize,
}

impl Default for ContactParams {
    fn default() -> Self {
        ContactParams {
            depth_above: 1.5,
            press: 5.0,
            frames_per_tap: 20,
            depth_offset: 0.0,
            slide_drop: 3.0,
            slide_frames: 5,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<()> {
        if self.press.is_nan() || self.press <= 0.0 {
            return Err(Error::invalid("press must be positive"));
        }
        if self.frames_per_tap < WINDOW {
            return Err(Error::invalid(format!(
                "frames_per_tap must be at least {WINDOW}"
            )));
        }
        if self.slide_frames == 0 {
            return Err(Error::invalid("slide_frames must be at least 1"));
        }
        if !self.depth_above.is_finite()
            || !self.depth_offset.is_finite()
            || !self.slide_drop.is_finite()
        {
            return Err(Error::invalid("contact parameters must be finite"));
        }
        Ok(())
    }

    /// Indentation of tap frame `i`: a half-sine press-and-release.
    pub fn tap_depth(&self, i: usize) -> f64 {
        let u = i as f64 / (self.frames_per_tap - 1) as f64;
        (self.press * (std::f64::consts::PI * u).sin() - self.depth_above + self.depth_offset)
            .max(0.0)
    }

    /// Indentation held while sliding.
    pub fn slide_depth(&self) -> f64 {
        (self.slide_drop - self.depth_above + self.depth_offset).max(0.0)
    }
}

/// Full sensor description: lattice, mechanics, imaging and pixel noise.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorModel {
    pub lattice: PinLattice,
    pub deform: DeformParams,
    pub raster: RasterParams,
    /// Standard deviation of additive Gaussian pixel noise (0 disables).
    pub noise_sigma: f64,
}

impl SensorModel {
    /// 127-pin lattice at 3 mm pitch on a 20 mm pad, imaged at `size` px.
    pub fn new(size: usize) -> Self {
        SensorModel {
            lattice: lattice_init(6, 3.0),
            deform: DeformParams::default(),
            raster: RasterParams::for_size(size),
            noise_sigma: 0.01,
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.noise_sigma = 0.0;
        self
    }

    pub fn size(&self) -> usize {
        self.raster.size
    }

    /// Frame of the sensor at `pose`, indented `depth` mm. Noise is added
    /// only when `rng` is given and `noise_sigma > 0`.
    pub fn render<R: Rng + ?Sized>(
        &self,
        contour: &Contour,
        pose: &Pose,
        depth: f64,
        shear: &ShearState,
        jitter: &TapJitter,
        rng: Option<&mut R>,
    ) -> (TactileFrame, bool) {
        let d = deform(
            &self.lattice,
            contour,
            pose,
            depth,
            shear,
            jitter,
            &self.deform,
        );
        let mut frame = rasterize(&d.pins, &self.raster);
        if let Some(rng) = rng {
            self.add_noise(&mut frame, rng);
        }
        (frame, d.in_contact())
    }

    fn add_noise<R: Rng + ?Sized>(&self, frame: &mut TactileFrame, rng: &mut R) {
        if self.noise_sigma <= 0.0 {
            return;
        }
        let normal = Normal::new(0.0, self.noise_sigma).expect("finite noise sigma");
        for v in frame.pixels_mut() {
            *v = (*v as f64 + normal.sample(rng)).clamp(0.0, 1.0) as f32;
        }
    }

    /// Renders a full tap at `pose`.
    pub fn render_tap<R: Rng + ?Sized>(
        &self,
        contour: &Contour,
        pose: &Pose,
        params: &ContactParams,
        shear: &ShearState,
        jitter: &TapJitter,
        rng: &mut R,
    ) -> Tap {
        let mut frames = Vec::with_capacity(params.frames_per_tap);
        let mut depths = Vec::with_capacity(params.frames_per_tap);
        let mut touched = false;
        for i in 0..params.frames_per_tap {
            let depth = params.tap_depth(i);
            let (frame, contact) =
                self.render(contour, pose, depth, shear, jitter, Some(&mut *rng));
            touched |= contact;
            frames.push(frame);
            depths.push(depth);
        }
        Tap {
            frames,
            depths,
            no_contact: !touched,
        }
    }
}

impl Default for SensorModel {
    fn default() -> Self {
        Self::new(128)
    }
}

/// The frames of one tap in time order.
#[derive(Clone, Debug)]
pub struct Tap {
    pub frames: Vec<TactileFrame>,
    pub depths: Vec<f64>,
    pub no_contact: bool,
}

impl Tap {
    pub fn peak_window(&self) -> &[TactileFrame] {
        peak_frame_window(&self.frames).expect("taps hold at least WINDOW frames")
    }
}

/// Index of the first frame of the 7-frame window centred on the frame of
/// largest RMS change from frame 0 (ties go to the lowest index).
pub fn peak_window_start(frames: &[TactileFrame]) -> Result<usize> {
    if frames.len() < WINDOW {
        return Err(Error::invalid(format!(
            "peak window needs at least {WINDOW} frames, got {}",
            frames.len()
        )));
    }
    let mut peak = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, f) in frames.iter().enumerate() {
        let rms = f.rms_diff(&frames[0]);
        if rms > best {
            best = rms;
            peak = i;
        }
    }
    Ok(peak.saturating_sub(WINDOW / 2).min(frames.len() - WINDOW))
}

pub fn peak_frame_window(frames: &[TactileFrame]) -> Result<&[TactileFrame]> {
    let start = peak_window_start(frames)?;
    Ok(&frames[start..start + WINDOW])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant(v: f32) -> TactileFrame {
        TactileFrame::from_pixels(2, 2, vec![v; 4])
    }

    #[test]
    fn window_is_centred_on_rms_peak() {
        let frames: Vec<_> = (0..20)
            .map(|i| constant(1.0 - (i as f32 - 10.0).abs() / 20.0))
            .collect();
        assert_eq!(peak_window_start(&frames).unwrap(), 7);
    }

    #[test]
    fn window_clamps_at_the_start() {
        let frames: Vec<_> = (0..20)
            .map(|i| constant(if i == 1 { 1.0 } else { 0.0 }))
            .collect();
        assert_eq!(peak_window_start(&frames).unwrap(), 0);
        let frames: Vec<_> = (0..20)
            .map(|i| constant(if i == 19 { 1.0 } else { 0.0 }))
            .collect();
        assert_eq!(peak_window_start(&frames).unwrap(), 13);
    }

    #[test]
    fn identical_frames_pick_the_first_window() {
        let frames = vec![constant(0.3); 20];
        assert_eq!(peak_window_start(&frames).unwrap(), 0);
        assert_eq!(peak_frame_window(&frames).unwrap().len(), 7);
    }

    #[test]
    fn short_sequences_are_rejected() {
        assert!(peak_window_start(&vec![constant(0.0); 6]).is_err());
    }

    #[test]
    fn contact_params_validation() {
        assert!(ContactParams::default().validate().is_ok());
        let bad = ContactParams {
            press: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ContactParams {
            frames_per_tap: 6,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn free_space_tap_is_all_rest_frames() {
        let model = SensorModel::new(64).noiseless();
        let disk = shapes::make_disk(52.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tap = model.render_tap(
            &disk,
            &Pose::new(0.0, 300.0, 90.0),
            &ContactParams::default(),
            &ShearState::zero(),
            &TapJitter::NONE,
            &mut rng,
        );
        assert!(tap.no_contact);
        assert_eq!(tap.frames.len(), 20);
        let rest = rasterize(model.lattice.positions(), &model.raster);
        assert!(tap.frames.iter().all(|f| *f == rest));
    }
}
