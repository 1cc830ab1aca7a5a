//! Labelled tap collections: the collection protocol, shift augmentation,
//! train/validation splitting and the "TCDS" file format.

mod augment;
mod format;

use rand::seq::SliceRandom;
use rand::Rng;

pub use augment::{augment_shift, random_shift, shift_frame, shift_into, MAX_SHIFT_FRACTION};
pub use format::{from_bytes, load, save, to_bytes, MAGIC, VERSION};

use crate::error::{Error, Result};
use crate::geometry::{Contour, EdgePose};
use crate::nn::{LabelRanges, Presentation, TrainingData};
use crate::rng;
use crate::tactile::{ContactParams, Mode, SensorModel, ShearState, TactileFrame, TapJitter};

/// One labelled contact: the frames of its peak window and the commanded
/// edge pose.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub frames: Vec<TactileFrame>,
    pub label: EdgePose,
    pub mode: Mode,
    /// Position in the original collection; unique across splits.
    pub index: usize,
}

impl Sample {
    /// The frame used for deterministic evaluation.
    pub fn centre_frame(&self) -> &TactileFrame {
        &self.frames[self.frames.len() / 2]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Split {
    #[default]
    All,
    Train,
    Val,
    Test,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub height: usize,
    pub width: usize,
    pub samples: Vec<Sample>,
    pub split: Split,
    /// Object the taps were collected on, when known.
    pub object: Option<String>,
}

impl Dataset {
    pub fn new(height: usize, width: usize) -> Self {
        Dataset {
            height,
            width,
            samples: Vec::new(),
            split: Split::All,
            object: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, sample: Sample) -> Result<()> {
        if sample.frames.is_empty() {
            return Err(Error::invalid("sample has no frames"));
        }
        if sample
            .frames
            .iter()
            .any(|f| (f.height(), f.width()) != (self.height, self.width))
        {
            return Err(Error::shape(format!(
                "sample frames do not match dataset size {}x{}",
                self.height, self.width
            )));
        }
        if sample.frames.len() > u8::MAX as usize {
            return Err(Error::invalid("at most 255 frames per sample"));
        }
        self.samples.push(sample);
        Ok(())
    }

    /// Seeded shuffle into `(train, val)` with `n_train` training samples.
    pub fn split(&self, n_train: usize, seed: u64) -> Result<(Dataset, Dataset)> {
        if n_train > self.len() {
            return Err(Error::invalid(format!(
                "cannot take {n_train} training samples from {}",
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut rng::stream(seed, &[SPLIT_STREAM]));
        let pick = |idx: &[usize], split| {
            let mut d = Dataset {
                samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
                split,
                ..Dataset::new(self.height, self.width)
            };
            d.object.clone_from(&self.object);
            d
        };
        Ok((
            pick(&order[..n_train], Split::Train),
            pick(&order[n_train..], Split::Val),
        ))
    }

    /// Training view; see [`Augmented`].
    pub fn view(&self) -> Augmented<'_> {
        Augmented { data: self }
    }

    pub fn labels(&self) -> impl Iterator<Item = EdgePose> + '_ {
        self.samples.iter().map(|s| s.label)
    }
}

/// Training presentation of a dataset: each presentation draws one window
/// frame uniformly and, when augmentation is on, a random `±2%` shift, both
/// from a stream keyed by `(seed, sample index, epoch)`. Evaluation uses the
/// centre frame unshifted.
pub struct Augmented<'a> {
    data: &'a Dataset,
}

const PRESENT_STREAM: u64 = 0xd47a;
const SPLIT_STREAM: u64 = 0x5911;

impl TrainingData for Augmented<'_> {
    fn len(&self) -> usize {
        self.data.len()
    }

    fn present(&self, index: usize, how: Presentation, out: &mut [f64]) -> EdgePose {
        let s = &self.data.samples[index];
        match how {
            Presentation::Eval => {
                for (o, &v) in out.iter_mut().zip(s.centre_frame().pixels()) {
                    *o = v as f64;
                }
            }
            Presentation::Train {
                epoch,
                seed,
                augment,
            } => {
                let mut r = rng::stream(seed, &[PRESENT_STREAM, s.index as u64, epoch as u64]);
                let frame = &s.frames[r.random_range(0..s.frames.len())];
                if augment {
                    let (dx, dy) = random_shift(frame.height(), frame.width(), &mut r);
                    shift_into(frame, dx, dy, out);
                } else {
                    for (o, &v) in out.iter_mut().zip(frame.pixels()) {
                        *o = v as f64;
                    }
                }
            }
        }
        s.label
    }
}

/// Where and how taps are collected.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectParams {
    pub ranges: LabelRanges,
    pub contact: ContactParams,
    /// Arc length of the contour point the taps are placed around; 0 is the
    /// top of the built-in disk.
    pub anchor: f64,
    /// Apply per-tap jitter.
    pub jitter: bool,
}

impl Default for CollectParams {
    fn default() -> Self {
        CollectParams {
            ranges: LabelRanges::default(),
            contact: ContactParams::default(),
            anchor: 0.0,
            jitter: true,
        }
    }
}

/// `n` taps at uniformly random `(r, theta)` about one contour point. Each
/// tap is labelled with the commanded pose (rounded to `f32`) and keeps its
/// 7-frame peak window. Sample `i` depends only on `(seed, i)`.
pub fn collect_taps(
    contour: &Contour,
    n: usize,
    sensor: &SensorModel,
    params: &CollectParams,
    seed: u64,
) -> Result<Dataset> {
    params.ranges.validate()?;
    params.contact.validate()?;
    let size = sensor.size();
    let mut ds = Dataset::new(size, size);
    ds.object = Some(contour.name().to_string());
    ds.samples.reserve(n);
    for i in 0..n {
        ds.push(collect_one(contour, sensor, params, seed, i))?;
    }
    Ok(ds)
}

fn collect_one(
    contour: &Contour,
    sensor: &SensorModel,
    params: &CollectParams,
    seed: u64,
    i: usize,
) -> Sample {
    let mut r = rng::stream(seed, &[i as u64]);
    let (rlo, rhi) = params.ranges.r;
    let (tlo, thi) = params.ranges.theta;
    let label = EdgePose::new(
        r.random_range(rlo..=rhi) as f32 as f64,
        r.random_range(tlo..=thi) as f32 as f64,
    );
    let pose = contour.pose_at(params.anchor, label.r, label.theta);
    let jitter = if params.jitter {
        TapJitter::sample(&mut r)
    } else {
        TapJitter::NONE
    };
    let tap = sensor.render_tap(
        contour,
        &pose,
        &params.contact,
        &ShearState::zero(),
        &jitter,
        &mut r,
    );
    Sample {
        frames: tap.peak_window().to_vec(),
        label,
        mode: Mode::Tap,
        index: i,
    }
}
