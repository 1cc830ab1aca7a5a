use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tacservo::dataset::{self, collect_taps, CollectParams, Dataset};
use tacservo::nn::{self, build, model_io, LabelRanges, Network, TrainConfig};
use tacservo::report::{self, GridRow};
use tacservo::rng::derive_seed;
use tacservo::servo::{
    default_start_arclength, run_contour, start_pose, trajectory_metrics, Oracle, Perceiver,
    RunSetup,
};
use tacservo::{write_atomic, Architecture, Contour, Error, Mode, Result, SensorModel};

use crate::config::{existing, ExperimentConfig};

const SPLIT_STREAM: u64 = 0x5b1;
const INIT_STREAM: u64 = 0x1e1;
const GRID_STREAM: u64 = 0x6d1;

/// Output directory plus the command name, for file naming.
pub struct OutDir {
    pub dir: PathBuf,
    command: &'static str,
    config_hash: String,
    seed: u64,
}

impl OutDir {
    /// Creates the directory and records the resolved config in it.
    pub fn prepare(cfg: &ExperimentConfig, command: &'static str) -> Result<Self> {
        fs::create_dir_all(&cfg.out)?;
        let out = OutDir {
            dir: cfg.out.clone(),
            command,
            config_hash: cfg.hash(),
            seed: cfg.seed,
        };
        write_atomic(
            &out.path(&format!("{command}_config.txt")),
            cfg.to_text().as_bytes(),
        )?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.path(name);
        write_atomic(&p, bytes)?;
        Ok(p)
    }

    /// Writes `name` and a `name.provenance` sidecar with its hash, the
    /// config hash and the seed.
    pub fn write_with_provenance(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.write(name, bytes)?;
        let side = format!(
            "command = {}\nfile = {name}\nsha256 = {}\nconfig_sha256 = {}\nseed = {}\nversion = {}\n",
            self.command,
            hex::encode(Sha256::digest(bytes)),
            self.config_hash,
            self.seed,
            env!("CARGO_PKG_VERSION"),
        );
        self.write(&format!("{name}.provenance"), side.as_bytes())?;
        Ok(p)
    }
}

fn check_file_name(name: &str) -> Result<()> {
    if name.is_empty()
        || Path::new(name)
            .file_name()
            .map(|f| f != name)
            .unwrap_or(true)
    {
        return Err(Error::Configuration(format!(
            "'{name}' must be a plain file name"
        )));
    }
    Ok(())
}

pub fn collect(cfg: &ExperimentConfig, file: &str, pgm: usize) -> Result<Dataset> {
    cfg.validate()?;
    check_file_name(file)?;
    if cfg.samples == 0 {
        return Err(Error::Configuration("--n must be at least 1".into()));
    }
    let contour = cfg.contour()?;
    let sensor = SensorModel::new(cfg.size);
    let params = CollectParams {
        contact: cfg.contact,
        ..CollectParams::default()
    };
    let out = OutDir::prepare(cfg, "collect")?;
    let ds = collect_taps(&contour, cfg.samples, &sensor, &params, cfg.seed)?;
    let path = out.write_with_provenance(file, &dataset::to_bytes(&ds)?)?;
    if pgm > 0 {
        let dir = out.path("frames");
        fs::create_dir_all(&dir)?;
        for s in ds.samples.iter().take(pgm) {
            let mut bytes = Vec::new();
            s.centre_frame().write_pgm(&mut bytes)?;
            write_atomic(&dir.join(format!("sample_{:05}.pgm", s.index)), &bytes)?;
        }
    }
    println!(
        "collected {} taps on {} -> {}",
        ds.len(),
        cfg.object,
        path.display()
    );
    Ok(ds)
}

pub fn train(cfg: &ExperimentConfig, file: &str) -> Result<(Network, nn::TrainHistory)> {
    cfg.validate()?;
    check_file_name(file)?;
    let ds = dataset::load(&existing(&cfg.dataset, "dataset")?)?;
    if ds.height != ds.width {
        return Err(Error::Configuration(format!(
            "dataset frames are {}x{}; expected square",
            ds.height, ds.width
        )));
    }
    let n_train = cfg.n_train.unwrap_or(ds.len() * 4 / 5);
    if n_train == 0 || n_train >= ds.len() {
        return Err(Error::Configuration(format!(
            "training split {n_train} must leave at least one of {} samples for validation",
            ds.len()
        )));
    }
    let out = OutDir::prepare(cfg, "train")?;
    let (tr, va) = ds.split(n_train, derive_seed(cfg.seed, &[SPLIT_STREAM]))?;
    let spec = build(cfg.arch, ds.height)?;
    let mut net = Network::new(
        spec,
        LabelRanges::default(),
        derive_seed(cfg.seed, &[INIT_STREAM]),
    )?;
    let tc = TrainConfig {
        batch_size: cfg.batch_size,
        max_epochs: cfg.max_epochs,
        patience: cfg.patience,
        seed: cfg.seed,
        augment: cfg.augment,
        adam: cfg.adam(),
    };
    let history = nn::train(&mut net, &tr.view(), &va.view(), &tc, |e| {
        eprintln!(
            "epoch {:3}  train {:.6}  val {:.6}",
            e.epoch, e.train_loss, e.val_loss
        );
    })?;
    net.round_to_f32();
    let path = out.write_with_provenance(file, &model_io::to_bytes(&net))?;
    out.write("history.csv", history.to_csv().as_bytes())?;
    let stop = if history.stopped_early {
        ", early stop"
    } else {
        ""
    };
    println!(
        "best val loss {:.6} at epoch {}; {} epochs run{stop} -> {}",
        history.best_val_loss,
        history.best_epoch,
        history.epochs.len(),
        path.display()
    );
    Ok((net, history))
}

pub fn eval(cfg: &ExperimentConfig) -> Result<report::EvalReport> {
    cfg.validate()?;
    let net = model_io::load(&existing(&cfg.model, "model")?)?;
    let ds = dataset::load(&existing(&cfg.dataset, "dataset")?)?;
    if ds.is_empty() {
        return Err(Error::Configuration("test set is empty".into()));
    }
    let out = OutDir::prepare(cfg, "eval")?;
    let frames: Vec<_> = ds.samples.iter().map(|s| s.centre_frame()).collect();
    let preds = net.predict_batch(&frames)?;
    let labels: Vec<_> = ds.labels().collect();
    let rep = report::evaluate_predictions(&labels, &preds, net.ranges(), cfg.bin_width)?;
    out.write(
        "predictions.csv",
        report::predictions_csv(&labels, &preds).as_bytes(),
    )?;
    out.write("eval_bins.csv", report::eval_csv(&rep).as_bytes())?;
    let summary = report::eval_summary(&rep);
    out.write("eval.txt", summary.as_bytes())?;
    print!("{summary}");
    Ok(rep)
}

fn load_model(path: &Option<PathBuf>, what: &str) -> Result<Network> {
    let net = model_io::load(&existing(path, what)?)?;
    let (c, h, w) = net.spec().input;
    if c != 1 || h != w {
        return Err(Error::Configuration(format!(
            "{what} expects {c}x{h}x{w} input"
        )));
    }
    Ok(net)
}

fn base_setup(cfg: &ExperimentConfig, contour: &Contour, mode: Mode) -> RunSetup {
    let s = cfg
        .start_s
        .unwrap_or_else(|| default_start_arclength(contour));
    let mut setup = RunSetup::new(mode, start_pose(contour, s, cfg.start_r, cfg.start_theta));
    setup.servo = cfg.servo;
    setup.contact = cfg.contact;
    setup.max_steps = cfg.max_steps;
    setup.seed = cfg.seed;
    setup
}

/// Runs one contour. With `expect_arch`, the model must have that
/// architecture.
pub fn follow(
    cfg: &ExperimentConfig,
    expect_arch: Option<Architecture>,
) -> Result<tacservo::Trajectory> {
    cfg.validate()?;
    let contour = cfg.contour()?;
    let net;
    let (perceiver, size): (&dyn Perceiver, usize) = if cfg.oracle {
        (&Oracle, cfg.size)
    } else {
        if cfg.model.is_none() {
            return Err(Error::Configuration(
                "follow needs --model or --oracle".into(),
            ));
        }
        net = load_model(&cfg.model, "model")?;
        if let Some(arch) = expect_arch.filter(|a| *a != net.spec().arch) {
            return Err(Error::Configuration(format!(
                "model architecture is {} but {arch} was requested",
                net.spec().arch
            )));
        }
        let size = net.spec().input.1;
        (&net, size)
    };
    let out = OutDir::prepare(cfg, "follow")?;
    let setup = base_setup(cfg, &contour, cfg.mode);
    let traj = run_contour(&contour, perceiver, &SensorModel::new(size), &setup)?;
    let metrics = trajectory_metrics(&traj).ok();
    out.write("trajectory.csv", report::trajectory_csv(&traj).as_bytes())?;
    let title = format!("{} {} {}", contour.name(), traj.mode, traj.status);
    out.write(
        "trajectory.svg",
        report::trajectory_svg(&contour, &report::path_from_trajectory(&traj), &title).as_bytes(),
    )?;
    let line = format!(
        "{} {}: {} in {} steps, coverage {:.2}; {}\n",
        contour.name(),
        traj.mode,
        traj.status,
        traj.records.len(),
        traj.coverage(),
        report::metrics_cell(metrics.as_ref())
    );
    out.write("metrics.txt", line.as_bytes())?;
    print!("{line}");
    Ok(traj)
}

pub fn table1(cfg: &ExperimentConfig) -> Result<Vec<GridRow>> {
    cfg.validate()?;
    let nets = if cfg.oracle {
        None
    } else {
        if cfg.model.is_none() || cfg.model_slide.is_none() {
            return Err(Error::Configuration(
                "table1 needs --model-tap and --model-slide, or --oracle".into(),
            ));
        }
        Some((
            load_model(&cfg.model, "tapping model")?,
            load_model(&cfg.model_slide, "sliding model")?,
        ))
    };
    let disk = tacservo::geometry::shapes::make_disk(tacservo::geometry::shapes::DISK_RADIUS)?;
    let out = OutDir::prepare(cfg, "table1")?;
    let mut rows = Vec::new();
    for mode in [Mode::Tap, Mode::Slide] {
        for (i, v) in report::table1_grid(mode).into_iter().enumerate() {
            let mut setup = base_setup(cfg, &disk, mode);
            let s = cfg.start_s.unwrap_or(0.0);
            v.apply(&mut setup, &disk, s);
            setup.seed = derive_seed(cfg.seed, &[GRID_STREAM, u64::from(mode.code()), i as u64]);
            let oracle = run_contour(&disk, &Oracle, &SensorModel::new(cfg.size), &setup)?;
            let network = match &nets {
                None => None,
                Some((tap, slide)) => {
                    let net = if mode == Mode::Tap { tap } else { slide };
                    let sensor = SensorModel::new(net.spec().input.1);
                    let traj = run_contour(&disk, net, &sensor, &setup)?;
                    Some(trajectory_metrics(&traj).ok())
                }
            };
            let row = GridRow {
                mode,
                variation: v,
                oracle: trajectory_metrics(&oracle).ok(),
                network,
            };
            eprintln!(
                "{mode} {v}: oracle {}",
                report::metrics_cell(row.oracle.as_ref())
            );
            rows.push(row);
        }
    }
    let text = report::table1_text(&rows);
    out.write("table1.txt", text.as_bytes())?;
    out.write("table1.csv", report::table1_csv(&rows).as_bytes())?;
    print!("{text}");
    Ok(rows)
}

pub fn plot(cfg: &ExperimentConfig, trajectory: &Path, file: &str) -> Result<PathBuf> {
    cfg.validate()?;
    check_file_name(file)?;
    let text = fs::read_to_string(trajectory)
        .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", trajectory.display())))?;
    let path = report::parse_trajectory_path(&text)?;
    let contour = cfg.contour()?;
    let out = OutDir::prepare(cfg, "plot")?;
    let title = format!("{} {}", contour.name(), trajectory.display());
    let p = out.write(
        file,
        report::trajectory_svg(&contour, &path, &title).as_bytes(),
    )?;
    println!("{} points -> {}", path.len(), p.display());
    Ok(p)
}
