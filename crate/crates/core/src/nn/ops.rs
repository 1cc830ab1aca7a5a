//! Batched layer kernels. Activations are `[N, C, H, W]` (conv/pool) or
//! `[N, D]` (dense); convolution weights are `[F, C, K, K]`, dense weights
//! `[out, in]`.

use rand::Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Spatial geometry of a square-kernel convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeom {
    pub kernel: usize,
    pub stride: usize,
    pub pad_top: usize,
    pub pad_left: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl ConvGeom {
    /// `same = false` is valid padding; `same = true` pads so that the
    /// output is `ceil(input / stride)`, extra padding going bottom/right.
    pub fn new(h: usize, w: usize, kernel: usize, stride: usize, same: bool) -> Result<Self> {
        if kernel == 0 || stride == 0 {
            return Err(Error::invalid("kernel and stride must be positive"));
        }
        if same {
            let out_h = h.div_ceil(stride);
            let out_w = w.div_ceil(stride);
            let pad_h = ((out_h - 1) * stride + kernel).saturating_sub(h);
            let pad_w = ((out_w - 1) * stride + kernel).saturating_sub(w);
            Ok(ConvGeom {
                kernel,
                stride,
                pad_top: pad_h / 2,
                pad_left: pad_w / 2,
                out_h,
                out_w,
            })
        } else {
            if h < kernel || w < kernel {
                return Err(Error::shape(format!(
                    "input {h}x{w} smaller than kernel {kernel}"
                )));
            }
            Ok(ConvGeom {
                kernel,
                stride,
                pad_top: 0,
                pad_left: 0,
                out_h: (h - kernel) / stride + 1,
                out_w: (w - kernel) / stride + 1,
            })
        }
    }
}

fn dims4(t: &Tensor, what: &str) -> Result<(usize, usize, usize, usize)> {
    match *t.shape() {
        [n, c, h, w] => Ok((n, c, h, w)),
        ref s => Err(Error::shape(format!("{what} must be 4-D, got {s:?}"))),
    }
}

fn dims2(t: &Tensor, what: &str) -> Result<(usize, usize)> {
    match *t.shape() {
        [n, d] => Ok((n, d)),
        ref s => Err(Error::shape(format!("{what} must be 2-D, got {s:?}"))),
    }
}

/// Output columns `oj` whose input column `oj * stride + kj - pad_left`
/// lies inside `0..w`.
fn valid_cols(g: &ConvGeom, kj: usize, w: usize) -> (usize, usize) {
    let shift = kj as isize - g.pad_left as isize;
    let s = g.stride as isize;
    let lo = if shift >= 0 {
        0
    } else {
        ((-shift) + s - 1) / s
    };
    let hi = if (w as isize) - shift <= 0 {
        0
    } else {
        ((w as isize - shift) + s - 1) / s
    };
    let lo = (lo as usize).min(g.out_w);
    (lo, (hi as usize).clamp(lo, g.out_w))
}

/// `cols[(c, ki, kj), (oi, oj)]` for one sample.
fn im2col(x: &[f64], c: usize, h: usize, w: usize, g: &ConvGeom, cols: &mut [f64]) {
    let k = g.kernel;
    let ohw = g.out_h * g.out_w;
    for ch in 0..c {
        let plane = &x[ch * h * w..(ch + 1) * h * w];
        for ki in 0..k {
            for kj in 0..k {
                let (lo, hi) = valid_cols(g, kj, w);
                let row = &mut cols[((ch * k + ki) * k + kj) * ohw..][..ohw];
                for oi in 0..g.out_h {
                    let ii = (oi * g.stride + ki) as isize - g.pad_top as isize;
                    let dst = &mut row[oi * g.out_w..(oi + 1) * g.out_w];
                    if ii < 0 || ii >= h as isize {
                        dst.fill(0.0);
                        continue;
                    }
                    let src = &plane[ii as usize * w..(ii as usize + 1) * w];
                    dst[..lo].fill(0.0);
                    dst[hi..].fill(0.0);
                    let j0 = (lo * g.stride + kj) - g.pad_left;
                    if g.stride == 1 {
                        dst[lo..hi].copy_from_slice(&src[j0..j0 + (hi - lo)]);
                    } else {
                        for (d, s) in dst[lo..hi]
                            .iter_mut()
                            .zip(src[j0..].iter().step_by(g.stride))
                        {
                            *d = *s;
                        }
                    }
                }
            }
        }
    }
}

fn col2im(cols: &[f64], c: usize, h: usize, w: usize, g: &ConvGeom, x: &mut [f64]) {
    let k = g.kernel;
    let ohw = g.out_h * g.out_w;
    for ch in 0..c {
        let plane = &mut x[ch * h * w..(ch + 1) * h * w];
        for ki in 0..k {
            for kj in 0..k {
                let (lo, hi) = valid_cols(g, kj, w);
                let row = &cols[((ch * k + ki) * k + kj) * ohw..][..ohw];
                for oi in 0..g.out_h {
                    let ii = (oi * g.stride + ki) as isize - g.pad_top as isize;
                    if ii < 0 || ii >= h as isize || lo == hi {
                        continue;
                    }
                    let dst = &mut plane[ii as usize * w..(ii as usize + 1) * w];
                    let src = &row[oi * g.out_w + lo..oi * g.out_w + hi];
                    let j0 = (lo * g.stride + kj) - g.pad_left;
                    for (s, d) in src.iter().zip(dst[j0..].iter_mut().step_by(g.stride)) {
                        *d += s;
                    }
                }
            }
        }
    }
}

/// `C[m x n] = alpha * A[m x k] B[k x n] + beta * C` with explicit strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    // SAFETY: the slices cover every index reachable through the given
    // dimensions and strides, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn check_conv(
    x: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
) -> Result<(usize, usize, usize, usize, usize, usize)> {
    let (n, c, h, w) = dims4(x, "conv input")?;
    let (f, wc, kh, kw) = dims4(weights, "conv weights")?;
    if wc != c {
        return Err(Error::shape(format!(
            "conv weights expect {wc} channels, input has {c}"
        )));
    }
    if kh != kw {
        return Err(Error::shape("conv kernels must be square"));
    }
    if bias.shape() != [f] {
        return Err(Error::shape(format!(
            "conv bias must be [{f}], got {:?}",
            bias.shape()
        )));
    }
    Ok((n, c, h, w, f, kh))
}

/// Cross-correlation of `x` with `weights`, plus `bias`.
pub fn conv2d_forward(
    x: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    stride: usize,
    same: bool,
) -> Result<Tensor> {
    let (n, c, h, w, f, k) = check_conv(x, weights, bias)?;
    let g = ConvGeom::new(h, w, k, stride, same)?;
    let ohw = g.out_h * g.out_w;
    let ckk = c * k * k;
    let mut out = Tensor::zeros(&[n, f, g.out_h, g.out_w]);
    let mut cols = vec![0.0; ckk * ohw];
    for s in 0..n {
        im2col(
            &x.data()[s * c * h * w..(s + 1) * c * h * w],
            c,
            h,
            w,
            &g,
            &mut cols,
        );
        let o = &mut out.data_mut()[s * f * ohw..(s + 1) * f * ohw];
        for (fi, row) in o.chunks_mut(ohw).enumerate() {
            row.fill(bias.data()[fi]);
        }
        gemm(
            f,
            ckk,
            ohw,
            weights.data(),
            (ckk, 1),
            &cols,
            (ohw, 1),
            1.0,
            o,
        );
    }
    Ok(out)
}

/// Gradients `(dx, dweights, dbias)` of a convolution. `dx` is skipped
/// (returned as `None`) when `need_input_grad` is false.
pub fn conv2d_backward(
    x: &Tensor,
    weights: &Tensor,
    grad_out: &Tensor,
    stride: usize,
    same: bool,
    need_input_grad: bool,
) -> Result<(Option<Tensor>, Tensor, Tensor)> {
    let (n, c, h, w) = dims4(x, "conv input")?;
    let (f, _, k, _) = dims4(weights, "conv weights")?;
    let g = ConvGeom::new(h, w, k, stride, same)?;
    if grad_out.shape() != [n, f, g.out_h, g.out_w] {
        return Err(Error::shape(format!(
            "conv grad_out {:?} does not match output [{n}, {f}, {}, {}]",
            grad_out.shape(),
            g.out_h,
            g.out_w
        )));
    }
    let ohw = g.out_h * g.out_w;
    let ckk = c * k * k;
    let mut dw = Tensor::zeros(weights.shape());
    let mut db = Tensor::zeros(&[f]);
    let mut dx = need_input_grad.then(|| Tensor::zeros(x.shape()));
    let mut cols = vec![0.0; ckk * ohw];
    let mut dcols = vec![0.0; if need_input_grad { ckk * ohw } else { 0 }];
    for s in 0..n {
        let go = &grad_out.data()[s * f * ohw..(s + 1) * f * ohw];
        for (fi, row) in go.chunks(ohw).enumerate() {
            db.data_mut()[fi] += row.iter().sum::<f64>();
        }
        im2col(
            &x.data()[s * c * h * w..(s + 1) * c * h * w],
            c,
            h,
            w,
            &g,
            &mut cols,
        );
        // dW[F, CKK] += dOut[F, OHW] * cols^T
        gemm(
            f,
            ohw,
            ckk,
            go,
            (ohw, 1),
            &cols,
            (1, ohw),
            1.0,
            dw.data_mut(),
        );
        if let Some(dx) = dx.as_mut() {
            // dcols[CKK, OHW] = W^T * dOut
            gemm(
                ckk,
                f,
                ohw,
                weights.data(),
                (1, ckk),
                go,
                (ohw, 1),
                0.0,
                &mut dcols,
            );
            col2im(
                &dcols,
                c,
                h,
                w,
                &g,
                &mut dx.data_mut()[s * c * h * w..(s + 1) * c * h * w],
            );
        }
    }
    Ok((dx, dw, db))
}

/// 2x2 max pooling with stride 2 (odd trailing rows/columns dropped).
/// Returns the output and, per output element, the flat input index of the
/// maximum (ties go to the first in scan order).
pub fn maxpool2x2_forward(x: &Tensor) -> Result<(Tensor, Vec<usize>)> {
    let (n, c, h, w) = dims4(x, "maxpool input")?;
    let (oh, ow) = (h / 2, w / 2);
    if oh == 0 || ow == 0 {
        return Err(Error::shape(format!("maxpool input {h}x{w} too small")));
    }
    let mut out = Tensor::zeros(&[n, c, oh, ow]);
    let mut arg = vec![0usize; n * c * oh * ow];
    let xd = x.data();
    let od = out.data_mut();
    for p in 0..n * c {
        let base = p * h * w;
        for i in 0..oh {
            for j in 0..ow {
                let mut best = base + 2 * i * w + 2 * j;
                for (di, dj) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = base + (2 * i + di) * w + 2 * j + dj;
                    if xd[idx] > xd[best] {
                        best = idx;
                    }
                }
                let o = (p * oh + i) * ow + j;
                od[o] = xd[best];
                arg[o] = best;
            }
        }
    }
    Ok((out, arg))
}

pub fn maxpool2x2_backward(
    grad_out: &Tensor,
    argmax: &[usize],
    input_shape: &[usize],
) -> Result<Tensor> {
    if grad_out.len() != argmax.len() {
        return Err(Error::shape(
            "maxpool gradient does not match recorded argmax",
        ));
    }
    let mut dx = Tensor::zeros(input_shape);
    for (g, &i) in grad_out.data().iter().zip(argmax) {
        dx.data_mut()[i] += g;
    }
    Ok(dx)
}

pub fn relu_forward(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::from_vec(x.shape(), data).unwrap()
}

/// Gradient of ReLU given its input `x` (zero gradient at `x <= 0`).
pub fn relu_backward(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if x.shape() != grad_out.shape() {
        return Err(Error::shape("relu gradient shape mismatch"));
    }
    let data = x
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(x.shape(), data)
}

/// `y[N, O] = x[N, I] * W^T + b`.
pub fn dense_forward(x: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n, i) = dims2(x, "dense input")?;
    let (o, wi) = dims2(weights, "dense weights")?;
    if wi != i || bias.shape() != [o] {
        return Err(Error::shape(format!(
            "dense weights {:?} / bias {:?} do not fit input width {i}",
            weights.shape(),
            bias.shape()
        )));
    }
    let mut out = Tensor::zeros(&[n, o]);
    for row in out.data_mut().chunks_mut(o) {
        row.copy_from_slice(bias.data());
    }
    gemm(
        n,
        i,
        o,
        x.data(),
        (i, 1),
        weights.data(),
        (1, i),
        1.0,
        out.data_mut(),
    );
    Ok(out)
}

pub fn dense_backward(
    x: &Tensor,
    weights: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, i) = dims2(x, "dense input")?;
    let (o, _) = dims2(weights, "dense weights")?;
    if grad_out.shape() != [n, o] {
        return Err(Error::shape("dense gradient shape mismatch"));
    }
    let mut dx = Tensor::zeros(&[n, i]);
    gemm(
        n,
        o,
        i,
        grad_out.data(),
        (o, 1),
        weights.data(),
        (i, 1),
        0.0,
        dx.data_mut(),
    );
    let mut dw = Tensor::zeros(&[o, i]);
    gemm(
        o,
        n,
        i,
        grad_out.data(),
        (1, o),
        x.data(),
        (i, 1),
        0.0,
        dw.data_mut(),
    );
    let mut db = Tensor::zeros(&[o]);
    for row in grad_out.data().chunks(o) {
        for (d, g) in db.data_mut().iter_mut().zip(row) {
            *d += g;
        }
    }
    Ok((dx, dw, db))
}

/// Inverted dropout. In training, kept units are scaled by `1/(1-rate)` and
/// the mask (0 or the scale) is returned for the backward pass; otherwise
/// the input passes through unchanged.
pub fn dropout_apply<R: Rng + ?Sized>(
    x: &Tensor,
    rate: f64,
    train: bool,
    rng: &mut R,
) -> (Tensor, Option<Vec<f64>>) {
    if !train || rate == 0.0 {
        return (x.clone(), None);
    }
    let scale = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = (0..x.len())
        .map(|_| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                scale
            }
        })
        .collect();
    let data = x.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
    (Tensor::from_vec(x.shape(), data).unwrap(), Some(mask))
}

pub fn dropout_backward(grad_out: &Tensor, mask: Option<&[f64]>) -> Tensor {
    match mask {
        None => grad_out.clone(),
        Some(m) => {
            let data = grad_out.data().iter().zip(m).map(|(g, k)| g * k).collect();
            Tensor::from_vec(grad_out.shape(), data).unwrap()
        }
    }
}
