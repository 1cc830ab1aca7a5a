//! Flat `key = value` experiment configuration.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use tacservo::geometry::shapes;
use tacservo::nn::AdamParams;
use tacservo::{Architecture, ContactParams, Contour, Error, Mode, Result, ServoParams};

/// Everything that determines an experiment's outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Built-in object name or path to a contour file.
    pub object: String,
    pub mode: Mode,
    pub arch: Architecture,
    pub seed: u64,
    /// Tactile image side length, pixels.
    pub size: usize,
    /// Taps to collect.
    pub samples: usize,
    /// Training split size; `None` means 80% of the dataset.
    pub n_train: Option<usize>,
    pub augment: bool,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub lr: f64,
    pub lr_decay: f64,
    pub servo: ServoParams,
    pub contact: ContactParams,
    /// Start arc length; `None` picks a point away from corners.
    pub start_s: Option<f64>,
    pub start_r: f64,
    pub start_theta: f64,
    pub max_steps: Option<usize>,
    pub bin_width: f64,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub model_slide: Option<PathBuf>,
    pub oracle: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let adam = AdamParams::default();
        ExperimentConfig {
            object: "disk".into(),
            mode: Mode::Tap,
            arch: Architecture::A,
            seed: 0,
            size: 128,
            samples: 2000,
            n_train: None,
            augment: false,
            batch_size: 32,
            max_epochs: 100,
            patience: 5,
            lr: adam.lr,
            lr_decay: adam.decay,
            servo: ServoParams::default(),
            contact: ContactParams::default(),
            start_s: None,
            start_r: 0.0,
            start_theta: 0.0,
            max_steps: None,
            bin_width: 1.0,
            dataset: None,
            model: None,
            model_slide: None,
            oracle: false,
            out: PathBuf::from("out"),
        }
    }
}

fn opt<T: Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn opt_path(v: &Option<PathBuf>) -> String {
    v.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default()
}

fn on_off(v: bool) -> &'static str {
    if v {
        "on"
    } else {
        "off"
    }
}

pub fn parse_on_off(v: &str) -> std::result::Result<bool, String> {
    match v {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected on/off, got '{other}'")),
    }
}

impl ExperimentConfig {
    /// Canonical text form: every key, fixed order, values that parse back
    /// to the same config.
    pub fn to_text(&self) -> String {
        let s = &self.servo;
        let c = &self.contact;
        let pairs: Vec<(&str, String)> = vec![
            ("object", self.object.clone()),
            ("mode", self.mode.to_string()),
            ("arch", self.arch.to_string()),
            ("seed", self.seed.to_string()),
            ("size", self.size.to_string()),
            ("samples", self.samples.to_string()),
            ("n_train", opt(&self.n_train)),
            ("augment", on_off(self.augment).into()),
            ("batch_size", self.batch_size.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("patience", self.patience.to_string()),
            ("lr", self.lr.to_string()),
            ("lr_decay", self.lr_decay.to_string()),
            ("gain_r", s.gain_r.to_string()),
            ("gain_theta", s.gain_theta.to_string()),
            ("r0", s.r0.to_string()),
            ("theta0", s.theta0.to_string()),
            ("step", s.step.to_string()),
            ("depth_above", c.depth_above.to_string()),
            ("press", c.press.to_string()),
            ("frames_per_tap", c.frames_per_tap.to_string()),
            ("depth_offset", c.depth_offset.to_string()),
            ("slide_drop", c.slide_drop.to_string()),
            ("slide_frames", c.slide_frames.to_string()),
            ("start_s", opt(&self.start_s)),
            ("start_r", self.start_r.to_string()),
            ("start_theta", self.start_theta.to_string()),
            ("max_steps", opt(&self.max_steps)),
            ("bin_width", self.bin_width.to_string()),
            ("dataset", opt_path(&self.dataset)),
            ("model", opt_path(&self.model)),
            ("model_slide", opt_path(&self.model_slide)),
            ("oracle", on_off(self.oracle).into()),
            ("out", self.out.display().to_string()),
        ];
        let mut out = String::new();
        for (k, v) in pairs {
            if v.is_empty() {
                out.push_str(&format!("{k} =\n"));
            } else {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are skipped; unknown keys are errors.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            cfg.set(k.trim(), v.trim())
                .map_err(|message| Error::Parse {
                    line: i + 1,
                    message,
                })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Configuration(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_text(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value for {key}: '{v}'"))
        }
        fn opt_num<T: FromStr>(key: &str, v: &str) -> std::result::Result<Option<T>, String> {
            if v.is_empty() {
                Ok(None)
            } else {
                num(key, v).map(Some)
            }
        }
        let path = |v: &str| (!v.is_empty()).then(|| PathBuf::from(v));
        match key {
            "object" => self.object = v.to_string(),
            "mode" => self.mode = v.parse().map_err(|e: Error| e.to_string())?,
            "arch" => self.arch = v.parse().map_err(|e: Error| e.to_string())?,
            "seed" => self.seed = num(key, v)?,
            "size" => self.size = num(key, v)?,
            "samples" => self.samples = num(key, v)?,
            "n_train" => self.n_train = opt_num(key, v)?,
            "augment" => self.augment = parse_on_off(v)?,
            "batch_size" => self.batch_size = num(key, v)?,
            "max_epochs" => self.max_epochs = num(key, v)?,
            "patience" => self.patience = num(key, v)?,
            "lr" => self.lr = num(key, v)?,
            "lr_decay" => self.lr_decay = num(key, v)?,
            "gain_r" => self.servo.gain_r = num(key, v)?,
            "gain_theta" => self.servo.gain_theta = num(key, v)?,
            "r0" => self.servo.r0 = num(key, v)?,
            "theta0" => self.servo.theta0 = num(key, v)?,
            "step" => self.servo.step = num(key, v)?,
            "depth_above" => self.contact.depth_above = num(key, v)?,
            "press" => self.contact.press = num(key, v)?,
            "frames_per_tap" => self.contact.frames_per_tap = num(key, v)?,
            "depth_offset" => self.contact.depth_offset = num(key, v)?,
            "slide_drop" => self.contact.slide_drop = num(key, v)?,
            "slide_frames" => self.contact.slide_frames = num(key, v)?,
            "start_s" => self.start_s = opt_num(key, v)?,
            "start_r" => self.start_r = num(key, v)?,
            "start_theta" => self.start_theta = num(key, v)?,
            "max_steps" => self.max_steps = opt_num(key, v)?,
            "bin_width" => self.bin_width = num(key, v)?,
            "dataset" => self.dataset = path(v),
            "model" => self.model = path(v),
            "model_slide" => self.model_slide = path(v),
            "oracle" => self.oracle = parse_on_off(v)?,
            "out" => self.out = PathBuf::from(v),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// SHA-256 of the canonical text form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn adam(&self) -> AdamParams {
        AdamParams {
            lr: self.lr,
            decay: self.lr_decay,
            ..AdamParams::default()
        }
    }

    /// Checks values that do not depend on the command.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Configuration(m));
        if self.size < 8 {
            return bad(format!("size must be at least 8, got {}", self.size));
        }
        if self.batch_size == 0 || self.patience == 0 || self.max_epochs == 0 {
            return bad("batch_size, patience and max_epochs must be at least 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite())
            || !(self.lr_decay >= 0.0 && self.lr_decay.is_finite())
        {
            return bad("lr must be positive and lr_decay non-negative".into());
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return bad(format!(
                "bin_width must be positive, got {}",
                self.bin_width
            ));
        }
        if ![self.start_r, self.start_theta]
            .iter()
            .all(|v| v.is_finite())
            || self.start_s.is_some_and(|s| !s.is_finite())
        {
            return bad("start pose must be finite".into());
        }
        let text_safe = |s: &str| !s.contains('\n') && s.trim() == s;
        let paths = [&self.dataset, &self.model, &self.model_slide];
        if !text_safe(&self.object)
            || !text_safe(&self.out.display().to_string())
            || paths.iter().any(|p| {
                p.as_ref()
                    .is_some_and(|p| !text_safe(&p.display().to_string()))
            })
        {
            return bad("names and paths must not have surrounding spaces or newlines".into());
        }
        self.servo
            .validate()
            .map_err(|e| Error::Configuration(e.to_string()))?;
        self.contact
            .validate()
            .map_err(|e| Error::Configuration(e.to_string()))?;
        Ok(())
    }

    /// The object contour: a built-in name or a contour file.
    pub fn contour(&self) -> Result<Contour> {
        if shapes::BUILTIN_OBJECTS.contains(&self.object.as_str())
            || ["foil", "banana"].contains(&self.object.as_str())
        {
            return shapes::by_name(&self.object);
        }
        let path = Path::new(&self.object);
        if !path.is_file() {
            return Err(Error::Configuration(format!(
                "object '{}' is neither a built-in ({}) nor a contour file",
                self.object,
                shapes::BUILTIN_OBJECTS.join(", ")
            )));
        }
        Contour::load(path).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))
    }
}

/// Requires `path` to be set and to name an existing file.
pub fn existing(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    match path {
        None => Err(Error::Configuration(format!("no {what} given"))),
        Some(p) if !p.is_file() => Err(Error::Configuration(format!(
            "{what} {} does not exist",
            p.display()
        ))),
        Some(p) => Ok(p.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        cfg.mode = Mode::Slide;
        cfg.arch = Architecture::B;
        cfg.augment = true;
        cfg.n_train = Some(1600);
        cfg.lr = 1.0 / 3.0;
        cfg.servo.r0 = -2.5;
        cfg.start_s = Some(0.1 + 0.2);
        cfg.model = Some(PathBuf::from("runs/a b/model.tcnn"));
        let back = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_ne!(back.hash(), ExperimentConfig::default().hash());
    }

    #[test]
    fn comments_partial_files_and_errors() {
        let cfg = ExperimentConfig::from_text("# grid\n\nmode = slide\nstep=6\n").unwrap();
        assert_eq!((cfg.mode, cfg.servo.step, cfg.seed), (Mode::Slide, 6.0, 0));
        match ExperimentConfig::from_text("seed = 1\nbogus = 2\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(ExperimentConfig::from_text("mode = hover").is_err());
        assert!(ExperimentConfig::from_text("just words").is_err());
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let mut c = ExperimentConfig::default();
        c.servo.step = 0.0;
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            object: "no-such-object".into(),
            ..Default::default()
        };
        assert!(c.contour().is_err());
        assert!(existing(&None, "model").is_err());
    }
}
