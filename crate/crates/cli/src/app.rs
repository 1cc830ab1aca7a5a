use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tacservo::{Architecture, Mode};

use crate::config::{parse_on_off, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(
    name = "tacservo",
    version,
    about = "Simulated tactile edge perception and contour following"
)]
pub struct Cli {
    /// Base random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key = value` config file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Collect a tap dataset around one contour point.
    Collect(CollectArgs),
    /// Train a CNN on a dataset.
    Train(TrainArgs),
    /// Evaluate a model on a labelled dataset.
    Eval(EvalArgs),
    /// Follow a contour with a model or the ground-truth oracle.
    Follow(FollowArgs),
    /// Run the disk robustness grid for tapping and sliding.
    Table1(Table1Args),
    /// Redraw a trajectory CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Args, Debug, Default)]
pub struct SensorArgs {
    /// Tactile image side length, pixels.
    #[arg(long)]
    pub size: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CollectArgs {
    /// Built-in object name or contour file.
    #[arg(long)]
    pub object: Option<String>,
    /// Number of taps.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub sensor: SensorArgs,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "dataset.tcds")]
    pub file: String,
    /// Also write the centre frame of the first N samples as PGM.
    #[arg(long, default_value_t = 0)]
    pub pgm: usize,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub arch: Option<Architecture>,
    /// Random-shift augmentation: on or off.
    #[arg(long, value_parser = parse_on_off)]
    pub augment: Option<bool>,
    /// Training split size (default 80% of the dataset).
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "model.tcnn")]
    pub file: String,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labelled test set.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Width of the radial bins in the error table, mm.
    #[arg(long)]
    pub bin_width: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct ServoArgs {
    #[arg(long)]
    pub step: Option<f64>,
    /// Radial set-point, mm.
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<f64>,
    /// Angular set-point, degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    #[arg(long)]
    pub gain_r: Option<f64>,
    #[arg(long)]
    pub gain_theta: Option<f64>,
    /// Contact depth change, mm (positive = deeper).
    #[arg(long, allow_hyphen_values = true)]
    pub depth: Option<f64>,
}

#[derive(Args, Debug)]
pub struct FollowArgs {
    #[arg(long)]
    pub object: Option<String>,
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Architecture expected of the model (checked against its header).
    #[arg(long)]
    pub arch: Option<Architecture>,
    #[arg(long, conflicts_with = "oracle")]
    pub model: Option<PathBuf>,
    /// Use ground-truth perception instead of a model.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub servo: ServoArgs,
    /// Start arc length, mm.
    #[arg(long)]
    pub start_s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub start_r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub start_theta: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[command(flatten)]
    pub sensor: SensorArgs,
}

#[derive(Args, Debug)]
pub struct Table1Args {
    /// Model for the tapping rows.
    #[arg(long)]
    pub model_tap: Option<PathBuf>,
    /// Model for the sliding rows.
    #[arg(long)]
    pub model_slide: Option<PathBuf>,
    /// Oracle column only; no models needed.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub sensor: SensorArgs,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Trajectory CSV written by `follow`.
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long)]
    pub object: Option<String>,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "trajectory.svg")]
    pub file: String,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl ServoArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        set(&mut cfg.servo.step, self.step);
        set(&mut cfg.servo.r0, self.r0);
        set(&mut cfg.servo.theta0, self.theta0);
        set(&mut cfg.servo.gain_r, self.gain_r);
        set(&mut cfg.servo.gain_theta, self.gain_theta);
        set(&mut cfg.contact.depth_offset, self.depth);
    }
}

impl Cli {
    pub fn parse_from_args<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        Cli::try_parse_from(args)
    }

    /// Layers flags over `base` (defaults or a config file).
    pub fn resolve(&self, mut cfg: ExperimentConfig) -> ExperimentConfig {
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.out, self.out.clone());
        match &self.command {
            Command::Collect(a) => {
                set(&mut cfg.object, a.object.clone());
                set(&mut cfg.samples, a.n);
                set(&mut cfg.size, a.sensor.size);
            }
            Command::Train(a) => {
                set(&mut cfg.dataset, a.dataset.clone().map(Some));
                set(&mut cfg.arch, a.arch);
                set(&mut cfg.augment, a.augment);
                set(&mut cfg.n_train, a.n_train.map(Some));
                set(&mut cfg.max_epochs, a.epochs);
                set(&mut cfg.patience, a.patience);
                set(&mut cfg.batch_size, a.batch_size);
                set(&mut cfg.lr, a.lr);
            }
            Command::Eval(a) => {
                set(&mut cfg.model, a.model.clone().map(Some));
                set(&mut cfg.dataset, a.dataset.clone().map(Some));
                set(&mut cfg.bin_width, a.bin_width);
            }
            Command::Follow(a) => {
                set(&mut cfg.object, a.object.clone());
                set(&mut cfg.mode, a.mode);
                set(&mut cfg.arch, a.arch);
                set(&mut cfg.model, a.model.clone().map(Some));
                if a.oracle {
                    cfg.oracle = true;
                    cfg.model = None;
                }
                a.servo.apply(&mut cfg);
                set(&mut cfg.start_s, a.start_s.map(Some));
                set(&mut cfg.start_r, a.start_r);
                set(&mut cfg.start_theta, a.start_theta);
                set(&mut cfg.max_steps, a.max_steps.map(Some));
                set(&mut cfg.size, a.sensor.size);
            }
            Command::Table1(a) => {
                set(&mut cfg.model, a.model_tap.clone().map(Some));
                set(&mut cfg.model_slide, a.model_slide.clone().map(Some));
                if a.oracle {
                    cfg.oracle = true;
                }
                set(&mut cfg.size, a.sensor.size);
            }
            Command::Plot(a) => set(&mut cfg.object, a.object.clone()),
        }
        cfg
    }

    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Collect(_) => "collect",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Follow(_) => "follow",
            Command::Table1(_) => "table1",
            Command::Plot(_) => "plot",
        }
    }
}
