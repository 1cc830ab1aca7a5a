use std::fmt::Write as _;

use rand::seq::SliceRandom;

use super::adam::{AdamParams, AdamState};
use super::network::{mse_loss, Network};
use super::Tensor;
use crate::error::{Error, Result};
use crate::geometry::EdgePose;
use crate::rng;

/// How a sample is being shown to the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Presentation {
    /// A training presentation: the source may draw a random frame and
    /// augmentation from a stream keyed by `(seed, index, epoch)`.
    Train {
        epoch: usize,
        seed: u64,
        augment: bool,
    },
    /// Deterministic presentation for validation and testing.
    Eval,
}

/// A labelled image source for [`train`].
pub trait TrainingData {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the input image of sample `index` into `out` (length H*W)
    /// and returns its label in mm and degrees.
    fn present(&self, index: usize, how: Presentation, out: &mut [f64]) -> EdgePose;
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub augment: bool,
    pub adam: AdamParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            max_epochs: 100,
            patience: 5,
            seed: 0,
            augment: false,
            adam: AdamParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if self.patience == 0 {
            return Err(Error::invalid("patience must be at least 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::invalid("max_epochs must be at least 1"));
        }
        let a = &self.adam;
        if !(a.lr > 0.0 && a.lr.is_finite() && a.decay >= 0.0 && a.eps > 0.0) {
            return Err(Error::invalid("bad optimiser settings"));
        }
        Ok(())
    }
}

/// Stops after `patience` consecutive epochs without a strict improvement
/// of the monitored loss, remembering the best epoch.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: Option<usize>,
    wait: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: f64::INFINITY,
            best_epoch: None,
            wait: 0,
        }
    }

    /// Records `loss` for `epoch`; returns true when training should stop.
    pub fn observe(&mut self, epoch: usize, loss: f64) -> bool {
        if loss < self.best {
            self.best = loss;
            self.best_epoch = Some(epoch);
            self.wait = 0;
            false
        } else {
            self.wait += 1;
            self.wait >= self.patience
        }
    }

    pub fn improved_at(&self, epoch: usize) -> bool {
        self.best_epoch == Some(epoch)
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.best_epoch.map(|e| (e, self.best))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss\n");
        for e in &self.epochs {
            writeln!(s, "{},{:.9},{:.9}", e.epoch, e.train_loss, e.val_loss).unwrap();
        }
        s
    }
}

const SHUFFLE_STREAM: u64 = 0x5eed_0001;
const DROPOUT_STREAM: u64 = 0x5eed_0002;

fn batch<D: TrainingData + ?Sized>(
    net: &Network,
    data: &D,
    indices: &[usize],
    how: Presentation,
) -> Result<(Tensor, Tensor)> {
    let (c, h, w) = net.spec().input;
    let per = c * h * w;
    let mut x = Tensor::zeros(&[indices.len(), c, h, w]);
    let mut y = Tensor::zeros(&[indices.len(), 2]);
    for (k, &i) in indices.iter().enumerate() {
        let label = data.present(i, how, &mut x.data_mut()[k * per..(k + 1) * per]);
        let t = net.ranges().normalize(label);
        y.data_mut()[2 * k..2 * k + 2].copy_from_slice(&t);
    }
    Ok((x, y))
}

/// Mean loss over a data source in inference mode.
pub fn evaluate_loss<D: TrainingData + ?Sized>(
    net: &Network,
    data: &D,
    batch_size: usize,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty set"));
    }
    let idx: Vec<usize> = (0..data.len()).collect();
    let mut total = 0.0;
    for chunk in idx.chunks(batch_size.max(1)) {
        let (x, y) = batch(net, data, chunk, Presentation::Eval)?;
        let (loss, _) = mse_loss(&net.forward(&x)?, &y)?;
        total += loss * chunk.len() as f64;
    }
    Ok(total / data.len() as f64)
}

/// One optimisation step on a batch; returns the batch loss before the step.
pub fn train_step(
    net: &mut Network,
    adam: &mut AdamState,
    x: &Tensor,
    y: &Tensor,
    dropout_rng: &mut dyn rand::RngCore,
) -> Result<f64> {
    let (out, tape) = net.forward_train(x, dropout_rng)?;
    let (loss, grad) = mse_loss(&out, y)?;
    if !loss.is_finite() {
        return Err(Error::TrainingDiverged(format!("loss became {loss}")));
    }
    let grads = net.backward(&tape, &grad)?;
    adam.step(net.params_mut(), &grads)?;
    Ok(loss)
}

/// Mini-batch Adam on the normalised MSE with early stopping on the
/// validation loss. The returned network carries the best-validation
/// weights. `on_epoch` sees each epoch record as it completes.
pub fn train<T, V>(
    net: &mut Network,
    train_set: &T,
    val_set: &V,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainHistory>
where
    T: TrainingData + ?Sized,
    V: TrainingData + ?Sized,
{
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::invalid(
            "training and validation sets must be non-empty",
        ));
    }
    let mut adam = AdamState::for_tensors(config.adam, net.params());
    let mut stopper = EarlyStopping::new(config.patience);
    let mut best_params = net.params().to_vec();
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..config.max_epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::stream(
            config.seed,
            &[SHUFFLE_STREAM, epoch as u64],
        ));
        let how = Presentation::Train {
            epoch,
            seed: config.seed,
            augment: config.augment,
        };
        let mut total = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let (x, y) = batch(net, train_set, chunk, how)?;
            let mut drop_rng = rng::stream(config.seed, &[DROPOUT_STREAM, epoch as u64, b as u64]);
            total += train_step(net, &mut adam, &x, &y, &mut drop_rng)? * chunk.len() as f64;
        }
        let val_loss = evaluate_loss(net, val_set, config.batch_size.max(64))?;
        if !val_loss.is_finite() {
            return Err(Error::TrainingDiverged(format!(
                "validation loss became {val_loss}"
            )));
        }
        let rec = EpochRecord {
            epoch,
            train_loss: total / train_set.len() as f64,
            val_loss,
        };
        on_epoch(&rec);
        epochs.push(rec);
        let stop = stopper.observe(epoch, val_loss);
        if stopper.improved_at(epoch) {
            best_params.clone_from_slice(net.params());
        }
        if stop {
            stopped_early = true;
            break;
        }
    }
    net.params_mut().clone_from_slice(&best_params);
    let (best_epoch, best_val_loss) = stopper.best().expect("at least one epoch ran");
    Ok(TrainHistory {
        epochs,
        best_epoch,
        best_val_loss,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stops_exactly_patience_epochs_after_best() {
        let losses = [1.0, 0.8, 0.6, 0.61, 0.6, 0.7, 0.65, 0.62, 0.1];
        let mut s = EarlyStopping::new(5);
        let mut stopped = None;
        for (e, &l) in losses.iter().enumerate() {
            if s.observe(e, l) {
                stopped = Some(e);
                break;
            }
        }
        assert_eq!(s.best(), Some((2, 0.6)));
        assert_eq!(stopped, Some(7));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            patience: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
