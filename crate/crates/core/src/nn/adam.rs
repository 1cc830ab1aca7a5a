use super::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            lr: 1e-4,
            decay: 1e-6,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with inverse-time learning-rate decay. The step size of update `t`
/// (1-based) is `lr / (1 + decay * (t - 1))`: the decay counts completed
/// updates, as in Keras.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub params: AdamParams,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    t: u64,
}

impl AdamState {
    pub fn new(params: AdamParams, shapes: &[&[usize]]) -> Self {
        AdamState {
            params,
            m: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            v: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            t: 0,
        }
    }

    pub fn for_tensors(params: AdamParams, tensors: &[Tensor]) -> Self {
        let shapes: Vec<&[usize]> = tensors.iter().map(Tensor::shape).collect();
        Self::new(params, &shapes)
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn current_lr(&self) -> f64 {
        self.params.lr / (1.0 + self.params.decay * self.t as f64)
    }

    /// One update of every tensor in `weights`. Non-finite gradients abort
    /// before anything is modified.
    pub fn step(&mut self, weights: &mut [Tensor], grads: &[Tensor]) -> Result<()> {
        if weights.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape("adam: parameter and gradient counts differ"));
        }
        for ((w, g), m) in weights.iter().zip(grads).zip(&self.m) {
            if w.shape() != m.shape() || g.shape() != m.shape() {
                return Err(Error::shape(format!(
                    "adam: parameter {:?} / gradient {:?} vs state {:?}",
                    w.shape(),
                    g.shape(),
                    m.shape()
                )));
            }
            if !g.is_finite() {
                return Err(Error::TrainingDiverged("non-finite gradient".into()));
            }
        }
        let AdamParams {
            beta1, beta2, eps, ..
        } = self.params;
        let lr_t = self.current_lr();
        self.t += 1;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for (((w, g), m), v) in weights
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for (((w, &g), m), v) in w
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w -= lr_t * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Tensor {
        Tensor::from_vec(&[1], vec![v]).unwrap()
    }

    #[test]
    fn first_step_moves_by_lr() {
        let p = AdamParams {
            lr: 0.1,
            ..AdamParams::default()
        };
        let mut w = vec![scalar(1.0)];
        let mut s = AdamState::for_tensors(p, &w);
        s.step(&mut w, &[scalar(1.0)]).unwrap();
        assert!((w[0].data()[0] - 0.9).abs() < 1e-7);
    }

    #[test]
    fn zero_gradient_leaves_weight() {
        let mut w = vec![scalar(0.7)];
        let mut s = AdamState::for_tensors(AdamParams::default(), &w);
        s.step(&mut w, &[scalar(0.0)]).unwrap();
        assert_eq!(w[0].data()[0], 0.7);
    }

    #[test]
    fn non_finite_gradient_is_divergence() {
        let mut w = vec![scalar(0.7)];
        let mut s = AdamState::for_tensors(AdamParams::default(), &w);
        assert!(matches!(
            s.step(&mut w, &[scalar(f64::NAN)]),
            Err(Error::TrainingDiverged(_))
        ));
        assert_eq!(w[0].data()[0], 0.7);
        assert_eq!(s.steps(), 0);
    }
}
