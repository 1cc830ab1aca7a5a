use rand::RngCore;

use super::init::glorot_uniform;
use super::ops;
use super::spec::{LayerSpec, NetworkSpec, Shape};
use super::Tensor;
use crate::error::{Error, Result};
use crate::geometry::EdgePose;
use crate::rng;
use crate::tactile::TactileFrame;

/// Label ranges mapped linearly onto `[-1, 1]` for training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelRanges {
    pub r: (f64, f64),
    pub theta: (f64, f64),
}

impl Default for LabelRanges {
    fn default() -> Self {
        LabelRanges {
            r: (-6.0, 9.0),
            theta: (-45.0, 45.0),
        }
    }
}

fn to_unit(v: f64, (lo, hi): (f64, f64)) -> f64 {
    2.0 * (v - lo) / (hi - lo) - 1.0
}

fn from_unit(u: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (u + 1.0) * 0.5 * (hi - lo)
}

impl LabelRanges {
    pub fn validate(&self) -> Result<()> {
        for (lo, hi) in [self.r, self.theta] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("bad label range ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    pub fn normalize(&self, pose: EdgePose) -> [f64; 2] {
        [to_unit(pose.r, self.r), to_unit(pose.theta, self.theta)]
    }

    pub fn denormalize(&self, out: [f64; 2]) -> EdgePose {
        EdgePose::new(from_unit(out[0], self.r), from_unit(out[1], self.theta))
    }

    pub fn contains(&self, pose: EdgePose) -> bool {
        (self.r.0..=self.r.1).contains(&pose.r)
            && (self.theta.0..=self.theta.1).contains(&pose.theta)
    }
}

/// Per-layer values kept by a training forward pass.
#[derive(Debug)]
enum Cache {
    Input(Tensor),
    Pool {
        argmax: Vec<usize>,
        in_shape: Vec<usize>,
    },
    Flatten {
        in_shape: Vec<usize>,
    },
    Dropout(Option<Vec<f64>>),
}

/// Activations recorded by [`Network::forward_train`] for backprop.
#[derive(Debug)]
pub struct Tape {
    caches: Vec<Cache>,
}

/// A sequential CNN with its trainable parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    ranges: LabelRanges,
    params: Vec<Tensor>,
}

const INIT_STREAM: u64 = 0x1417;
const PREDICT_CHUNK: usize = 64;

impl Network {
    /// Glorot-uniform weights and zero biases, one random stream per tensor.
    pub fn new(spec: NetworkSpec, ranges: LabelRanges, seed: u64) -> Result<Self> {
        spec.validate()?;
        ranges.validate()?;
        let params = spec
            .param_shapes()?
            .iter()
            .enumerate()
            .map(|(i, shape)| {
                if shape.len() == 1 {
                    Tensor::zeros(shape)
                } else {
                    glorot_uniform(shape, &mut rng::stream(seed, &[INIT_STREAM, i as u64]))
                }
            })
            .collect();
        Ok(Network {
            spec,
            ranges,
            params,
        })
    }

    pub fn from_params(
        spec: NetworkSpec,
        ranges: LabelRanges,
        params: Vec<Tensor>,
    ) -> Result<Self> {
        spec.validate()?;
        ranges.validate()?;
        let shapes = spec.param_shapes()?;
        if shapes.len() != params.len()
            || shapes
                .iter()
                .zip(&params)
                .any(|(s, p)| s.as_slice() != p.shape())
        {
            return Err(Error::shape(
                "parameter tensors do not match the architecture",
            ));
        }
        Ok(Network {
            spec,
            ranges,
            params,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn ranges(&self) -> &LabelRanges {
        &self.ranges
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    /// Rounds every parameter to the nearest `f32`, the precision of the
    /// model file.
    pub fn round_to_f32(&mut self) {
        for p in &mut self.params {
            p.data_mut().iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    fn check_input(&self, x: &Tensor) -> Result<usize> {
        let (c, h, w) = self.spec.input;
        match *x.shape() {
            [n, xc, xh, xw] if (xc, xh, xw) == (c, h, w) => Ok(n),
            ref s => Err(Error::shape(format!(
                "network expects [N, {c}, {h}, {w}], got {s:?}"
            ))),
        }
    }

    /// Runs the network. With `dropout_rng` the pass is in training mode and
    /// a tape is recorded for [`Network::backward`].
    fn run(
        &self,
        x: &Tensor,
        mut dropout_rng: Option<&mut dyn RngCore>,
        record: bool,
    ) -> Result<(Tensor, Vec<Cache>)> {
        self.check_input(x)?;
        let mut caches = Vec::with_capacity(if record { self.spec.layers.len() } else { 0 });
        let mut cur = x.clone();
        let mut p = 0;
        for layer in &self.spec.layers {
            let (next, cache) = match *layer {
                LayerSpec::Conv2d { stride, same, .. } => {
                    let y = ops::conv2d_forward(
                        &cur,
                        &self.params[p],
                        &self.params[p + 1],
                        stride,
                        same,
                    )?;
                    p += 2;
                    (y, Cache::Input(cur))
                }
                LayerSpec::Relu => (ops::relu_forward(&cur), Cache::Input(cur)),
                LayerSpec::MaxPool2x2 => {
                    let (y, argmax) = ops::maxpool2x2_forward(&cur)?;
                    let in_shape = cur.shape().to_vec();
                    (y, Cache::Pool { argmax, in_shape })
                }
                LayerSpec::Flatten => {
                    let in_shape = cur.shape().to_vec();
                    let n = in_shape[0];
                    let d = cur.len() / n.max(1);
                    (cur.reshape(&[n, d])?, Cache::Flatten { in_shape })
                }
                LayerSpec::Dense { .. } | LayerSpec::Output => {
                    let y = ops::dense_forward(&cur, &self.params[p], &self.params[p + 1])?;
                    p += 2;
                    (y, Cache::Input(cur))
                }
                LayerSpec::Dropout { rate } => match dropout_rng.as_deref_mut() {
                    Some(rng) => {
                        let (y, mask) = ops::dropout_apply(&cur, rate, true, rng);
                        (y, Cache::Dropout(mask))
                    }
                    None => (cur, Cache::Dropout(None)),
                },
            };
            if record {
                caches.push(cache);
            }
            cur = next;
        }
        if !cur.is_finite() {
            return Err(Error::TrainingDiverged("non-finite network output".into()));
        }
        Ok((cur, caches))
    }

    /// Training-mode forward pass (dropout active) that records a tape.
    pub fn forward_train(
        &self,
        x: &Tensor,
        dropout_rng: &mut dyn RngCore,
    ) -> Result<(Tensor, Tape)> {
        let (y, caches) = self.run(x, Some(dropout_rng), true)?;
        Ok((y, Tape { caches }))
    }

    /// Inference-mode forward pass that still records a tape, for gradient
    /// checks and deterministic training.
    pub fn forward_record(&self, x: &Tensor) -> Result<(Tensor, Tape)> {
        let (y, caches) = self.run(x, None, true)?;
        Ok((y, Tape { caches }))
    }

    /// Inference-mode forward pass: `[N, C, H, W] -> [N, 2]` raw outputs.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.run(x, None, false)?.0)
    }

    /// Gradients of the loss w.r.t. every parameter, given the gradient at
    /// the output.
    pub fn backward(&self, tape: &Tape, grad_out: &Tensor) -> Result<Vec<Tensor>> {
        if tape.caches.len() != self.spec.layers.len() {
            return Err(Error::invalid("tape does not belong to this network"));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.params.len()];
        let mut p = self.params.len();
        let mut g = grad_out.clone();
        // The input gradient of the first layer is never needed.
        let first_param_layer = self.spec.layers.iter().position(|l| {
            matches!(
                l,
                LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. } | LayerSpec::Output
            )
        });
        for (i, (layer, cache)) in self.spec.layers.iter().zip(&tape.caches).enumerate().rev() {
            g = match (*layer, cache) {
                (LayerSpec::Conv2d { stride, same, .. }, Cache::Input(x)) => {
                    p -= 2;
                    let need = Some(i) != first_param_layer;
                    let (dx, dw, db) =
                        ops::conv2d_backward(x, &self.params[p], &g, stride, same, need)?;
                    grads[p] = Some(dw);
                    grads[p + 1] = Some(db);
                    match dx {
                        Some(dx) => dx,
                        None => break,
                    }
                }
                (LayerSpec::Dense { .. } | LayerSpec::Output, Cache::Input(x)) => {
                    p -= 2;
                    let (dx, dw, db) = ops::dense_backward(x, &self.params[p], &g)?;
                    grads[p] = Some(dw);
                    grads[p + 1] = Some(db);
                    dx
                }
                (LayerSpec::Relu, Cache::Input(x)) => ops::relu_backward(x, &g)?,
                (LayerSpec::MaxPool2x2, Cache::Pool { argmax, in_shape }) => {
                    ops::maxpool2x2_backward(&g, argmax, in_shape)?
                }
                (LayerSpec::Flatten, Cache::Flatten { in_shape }) => g.reshape(in_shape)?,
                (LayerSpec::Dropout { .. }, Cache::Dropout(mask)) => {
                    ops::dropout_backward(&g, mask.as_deref())
                }
                _ => return Err(Error::invalid("tape does not belong to this network")),
            };
        }
        grads
            .into_iter()
            .map(|g| g.ok_or_else(|| Error::invalid("missing gradient")))
            .collect()
    }

    fn frames_to_tensor(&self, frames: &[&TactileFrame]) -> Result<Tensor> {
        let (c, h, w) = self.spec.input;
        if c != 1 {
            return Err(Error::shape(format!(
                "network expects {c} channels, frames have 1"
            )));
        }
        let mut data = Vec::with_capacity(frames.len() * h * w);
        for f in frames {
            if (f.height(), f.width()) != (h, w) {
                return Err(Error::shape(format!(
                    "frame is {}x{}, network expects {h}x{w}",
                    f.height(),
                    f.width()
                )));
            }
            data.extend(f.pixels().iter().map(|&v| v as f64));
        }
        Tensor::from_vec(&[frames.len(), 1, h, w], data)
    }

    /// Edge pose in mm and degrees for one frame (inference mode).
    pub fn predict(&self, frame: &TactileFrame) -> Result<EdgePose> {
        Ok(self.predict_batch(&[frame])?[0])
    }

    pub fn predict_batch(&self, frames: &[&TactileFrame]) -> Result<Vec<EdgePose>> {
        let mut out = Vec::with_capacity(frames.len());
        for chunk in frames.chunks(PREDICT_CHUNK) {
            let y = self.forward(&self.frames_to_tensor(chunk)?)?;
            out.extend(
                y.data()
                    .chunks(2)
                    .map(|o| self.ranges.denormalize([o[0], o[1]])),
            );
        }
        Ok(out)
    }

    /// Trace of shapes, for diagnostics.
    pub fn shape_trace(&self) -> Vec<Shape> {
        self.spec.shape_trace().expect("validated at construction")
    }
}

/// Mean squared error over all outputs and its gradient.
pub fn mse_loss(output: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if output.shape() != target.shape() || output.is_empty() {
        return Err(Error::shape(format!(
            "loss output {:?} vs target {:?}",
            output.shape(),
            target.shape()
        )));
    }
    let n = output.len() as f64;
    let mut grad = Tensor::zeros(output.shape());
    let mut loss = 0.0;
    for ((g, &o), &t) in grad
        .data_mut()
        .iter_mut()
        .zip(output.data())
        .zip(target.data())
    {
        let d = o - t;
        loss += d * d;
        *g = 2.0 * d / n;
    }
    Ok((loss / n, grad))
}
