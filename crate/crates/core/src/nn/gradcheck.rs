//! Central finite-difference gradient checks.

use super::network::{mse_loss, Network};
use super::Tensor;
use crate::error::Result;

/// `(f(x + h e_i) - f(x - h e_i)) / 2h` for every coordinate of `x`.
pub fn numeric_gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let plus = f(&probe);
            probe[i] = x[i] - h;
            let minus = f(&probe);
            probe[i] = x[i];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|, floor)`, maximised over all coordinates. The
/// floor keeps near-zero gradients from dominating.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Worst relative error between backprop and finite differences of the
/// inference-mode MSE loss, over every parameter of `net`.
pub fn check_network(net: &Network, x: &Tensor, target: &Tensor, h: f64) -> Result<f64> {
    let (out, tape) = net.forward_record(x)?;
    let (_, grad) = mse_loss(&out, target)?;
    let analytic = net.backward(&tape, &grad)?;
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for (k, a) in analytic.iter().enumerate() {
        let base = net.params()[k].data().to_vec();
        let numeric = numeric_gradient(
            |w| {
                probe.params_mut()[k].data_mut().copy_from_slice(w);
                let y = probe.forward(x).expect("shapes fixed");
                mse_loss(&y, target).expect("shapes fixed").0
            },
            &base,
            h,
        );
        probe.params_mut()[k].data_mut().copy_from_slice(&base);
        worst = worst.max(max_relative_error(a.data(), &numeric, 1e-6));
    }
    Ok(worst)
}
