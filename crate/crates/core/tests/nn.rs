use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tacservo::geometry::EdgePose;
use tacservo::nn::gradcheck::{max_relative_error, numeric_gradient};
use tacservo::nn::{
    build_arch_a, build_arch_b, mse_loss, ops, train, AdamParams, AdamState, Architecture,
    LabelRanges, LayerSpec, Network, NetworkSpec, Presentation, Tensor, TrainConfig, TrainingData,
};

const H: f64 = 1e-5;
const TOL: f64 = 1e-4;

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn with_data(t: &Tensor, d: &[f64]) -> Tensor {
    Tensor::from_vec(t.shape(), d.to_vec()).unwrap()
}

#[test]
fn conv_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    // (n, c, h, w, filters, kernel, stride, same)
    let cases = [
        (1, 1, 8, 8, 2, 3, 1, false),
        (2, 2, 7, 9, 3, 3, 1, true),
        (1, 3, 8, 8, 2, 5, 1, true),
        (2, 1, 9, 9, 2, 3, 2, false),
        (1, 2, 6, 5, 4, 2, 2, true),
        (3, 1, 5, 5, 1, 1, 1, false),
    ];
    for &(n, c, h, w, f, k, stride, same) in &cases {
        let x = random(&[n, c, h, w], &mut rng);
        let wt = random(&[f, c, k, k], &mut rng);
        let b = random(&[f], &mut rng);
        let y = ops::conv2d_forward(&x, &wt, &b, stride, same).unwrap();
        let r = random(y.shape(), &mut rng);
        let (dx, dw, db) = ops::conv2d_backward(&x, &wt, &r, stride, same, true).unwrap();
        let loss = |x: &Tensor, wt: &Tensor, b: &Tensor| {
            dot(&ops::conv2d_forward(x, wt, b, stride, same).unwrap(), &r)
        };
        let nx = numeric_gradient(|d| loss(&with_data(&x, d), &wt, &b), x.data(), H);
        let nw = numeric_gradient(|d| loss(&x, &with_data(&wt, d), &b), wt.data(), H);
        let nb = numeric_gradient(|d| loss(&x, &wt, &with_data(&b, d)), b.data(), H);
        let e = max_relative_error(dx.unwrap().data(), &nx, 1e-6)
            .max(max_relative_error(dw.data(), &nw, 1e-6))
            .max(max_relative_error(db.data(), &nb, 1e-6));
        assert!(
            e < TOL,
            "conv case {:?}: rel err {e}",
            (n, c, h, w, f, k, stride, same)
        );
    }
}

#[test]
fn dense_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(n, i, o) in &[(1, 3, 2), (4, 5, 3), (2, 10, 7), (3, 1, 1), (5, 8, 2)] {
        let x = random(&[n, i], &mut rng);
        let w = random(&[o, i], &mut rng);
        let b = random(&[o], &mut rng);
        let r = random(&[n, o], &mut rng);
        let (dx, dw, db) = ops::dense_backward(&x, &w, &r).unwrap();
        let loss =
            |x: &Tensor, w: &Tensor, b: &Tensor| dot(&ops::dense_forward(x, w, b).unwrap(), &r);
        let e = max_relative_error(
            dx.data(),
            &numeric_gradient(|d| loss(&with_data(&x, d), &w, &b), x.data(), H),
            1e-6,
        )
        .max(max_relative_error(
            dw.data(),
            &numeric_gradient(|d| loss(&x, &with_data(&w, d), &b), w.data(), H),
            1e-6,
        ))
        .max(max_relative_error(
            db.data(),
            &numeric_gradient(|d| loss(&x, &w, &with_data(&b, d)), b.data(), H),
            1e-6,
        ));
        assert!(e < TOL, "dense {n}x{i}->{o}: {e}");
    }
}

#[test]
fn relu_and_pool_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for shape in [
        [1, 1, 4, 4],
        [2, 3, 6, 6],
        [1, 2, 5, 7],
        [3, 1, 2, 2],
        [1, 4, 8, 4],
    ] {
        let x = random(&shape, &mut rng);
        let r = random(&shape, &mut rng);
        let dx = ops::relu_backward(&x, &r).unwrap();
        let n = numeric_gradient(
            |d| dot(&ops::relu_forward(&with_data(&x, d)), &r),
            x.data(),
            H,
        );
        assert!(
            max_relative_error(dx.data(), &n, 1e-6) < TOL,
            "relu {shape:?}"
        );

        let (y, arg) = ops::maxpool2x2_forward(&x).unwrap();
        let r = random(y.shape(), &mut rng);
        let dx = ops::maxpool2x2_backward(&r, &arg, x.shape()).unwrap();
        let n = numeric_gradient(
            |d| dot(&ops::maxpool2x2_forward(&with_data(&x, d)).unwrap().0, &r),
            x.data(),
            H,
        );
        assert!(
            max_relative_error(dx.data(), &n, 1e-6) < TOL,
            "pool {shape:?}"
        );
    }
}

#[test]
fn dropout_gradient_matches_finite_differences_for_fixed_mask() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for len in [1usize, 4, 9, 16, 33] {
        let x = random(&[len], &mut rng);
        let r = random(&[len], &mut rng);
        let (_, mask) =
            ops::dropout_apply(&x, 0.3, true, &mut ChaCha8Rng::seed_from_u64(len as u64));
        let dx = ops::dropout_backward(&r, mask.as_deref());
        let n = numeric_gradient(
            |d| {
                dot(
                    &ops::dropout_apply(
                        &with_data(&x, d),
                        0.3,
                        true,
                        &mut ChaCha8Rng::seed_from_u64(len as u64),
                    )
                    .0,
                    &r,
                )
            },
            x.data(),
            H,
        );
        assert!(max_relative_error(dx.data(), &n, 1e-6) < TOL);
    }
}

fn small_spec(size: usize, front: bool) -> NetworkSpec {
    let mut layers = Vec::new();
    if front {
        layers.extend([
            LayerSpec::Conv2d {
                kernel: 5,
                filters: 2,
                stride: 1,
                same: true,
            },
            LayerSpec::Relu,
        ]);
    }
    layers.extend([
        LayerSpec::Conv2d {
            kernel: 3,
            filters: 3,
            stride: 1,
            same: true,
        },
        LayerSpec::Relu,
        LayerSpec::MaxPool2x2,
        LayerSpec::Conv2d {
            kernel: 3,
            filters: 2,
            stride: 1,
            same: false,
        },
        LayerSpec::Relu,
        LayerSpec::MaxPool2x2,
        LayerSpec::Flatten,
        LayerSpec::Dense { units: 5 },
        LayerSpec::Relu,
        LayerSpec::Dropout { rate: 0.25 },
        LayerSpec::Output,
    ]);
    NetworkSpec {
        arch: Architecture::Custom,
        input: (1, size, size),
        layers,
    }
}

#[test]
fn whole_network_gradients_match_finite_differences() {
    use tacservo::nn::gradcheck::check_network;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (i, (size, front)) in [(10, false), (12, true), (11, false), (14, true), (10, true)]
        .into_iter()
        .enumerate()
    {
        let net = Network::new(small_spec(size, front), LabelRanges::default(), i as u64).unwrap();
        let x = random(&[2, 1, size, size], &mut rng);
        let y = random(&[2, 2], &mut rng);
        let e = check_network(&net, &x, &y, H).unwrap();
        assert!(e < TOL, "net {i}: {e}");
    }
}

#[test]
fn adam_three_steps_match_hand_recurrence() {
    let p = AdamParams {
        lr: 0.01,
        decay: 0.5,
        beta1: 0.9,
        beta2: 0.999,
        eps: 1e-8,
    };
    let grads = [1.0, -2.0, 0.5];
    let mut w = vec![Tensor::from_vec(&[1], vec![1.0]).unwrap()];
    let mut state = AdamState::for_tensors(p, &w);

    // Written out independently: step k (1-based) uses lr / (1 + decay (k - 1)).
    let (mut m, mut v, mut expect) = (0.0f64, 0.0f64, 1.0f64);
    for (k, &g) in grads.iter().enumerate() {
        let t = (k + 1) as f64;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        let m_hat = m / (1.0 - 0.9f64.powf(t));
        let v_hat = v / (1.0 - 0.999f64.powf(t));
        let lr_t = 0.01 / (1.0 + 0.5 * (t - 1.0));
        expect -= lr_t * m_hat / (v_hat.sqrt() + 1e-8);
        state
            .step(&mut w, &[Tensor::from_vec(&[1], vec![g]).unwrap()])
            .unwrap();
        assert!(
            (w[0].data()[0] - expect).abs() < 1e-12,
            "step {}: {} vs {expect}",
            k + 1,
            w[0].data()[0]
        );
    }
    // Constant unit gradient: bias-corrected moments are exactly 1.
    let mut w = vec![Tensor::from_vec(&[1], vec![1.0]).unwrap()];
    let mut state = AdamState::for_tensors(p, &w);
    for _ in 0..3 {
        state
            .step(&mut w, &[Tensor::from_vec(&[1], vec![1.0]).unwrap()])
            .unwrap();
    }
    let closed = 1.0 - (0.01 + 0.01 / 1.5 + 0.01 / 2.0) / (1.0 + 1e-8);
    assert!((w[0].data()[0] - closed).abs() < 1e-12);
}

/// Parameter count from first principles, without the crate's shape trace.
fn independent_count(size: usize, front: bool) -> usize {
    let mut total = 0;
    let mut c = 1;
    let mut s = size;
    if front {
        for _ in 0..2 {
            total += 8 * c * 25 + 8;
            c = 8;
        }
    }
    for f in [8, 16, 16, 32, 32] {
        total += f * c * 9 + f;
        c = f;
        s /= 2;
    }
    let flat = c * s * s;
    total + flat * 64 + 64 + 64 * 2 + 2
}

#[test]
fn parameter_counts_match_independent_trace() {
    for size in [64, 128] {
        let a = build_arch_a(size).param_count().unwrap();
        let b = build_arch_b(size).param_count().unwrap();
        assert_eq!(a, independent_count(size, false));
        assert_eq!(b, independent_count(size, true));
        assert!(b > a);
    }
}

#[test]
fn tiny_lr_step_does_not_increase_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for i in 0..10 {
        let mut net =
            Network::new(small_spec(12, i % 2 == 0), LabelRanges::default(), 100 + i).unwrap();
        let x = random(&[4, 1, 12, 12], &mut rng);
        let y = random(&[4, 2], &mut rng);
        let (out, tape) = net.forward_record(&x).unwrap();
        let (before, grad) = mse_loss(&out, &y).unwrap();
        let grads = net.backward(&tape, &grad).unwrap();
        let mut adam = AdamState::for_tensors(
            AdamParams {
                lr: 1e-6,
                ..AdamParams::default()
            },
            net.params(),
        );
        adam.step(net.params_mut(), &grads).unwrap();
        let (after, _) = mse_loss(&net.forward(&x).unwrap(), &y).unwrap();
        assert!(after <= before, "net {i}: {before} -> {after}");
    }
}

/// Images whose mean intensity encodes the label linearly.
struct Toy {
    labels: Vec<EdgePose>,
    size: usize,
    shift_on_augment: bool,
}

impl Toy {
    fn new(n: usize, size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = (0..n)
            .map(|_| EdgePose::new(rng.random_range(-6.0..9.0), rng.random_range(-45.0..45.0)))
            .collect();
        Toy {
            labels,
            size,
            shift_on_augment: false,
        }
    }
}

impl TrainingData for Toy {
    fn len(&self) -> usize {
        self.labels.len()
    }
    fn present(&self, index: usize, how: Presentation, out: &mut [f64]) -> EdgePose {
        let l = self.labels[index];
        let u = LabelRanges::default().normalize(l);
        let offset = match how {
            Presentation::Train {
                epoch,
                augment: true,
                ..
            } if self.shift_on_augment => 0.01 * ((index + epoch) % 3) as f64,
            _ => 0.0,
        };
        for (k, v) in out.iter_mut().enumerate() {
            let (row, col) = (k / self.size, k % self.size);
            *v = if col < self.size / 2 {
                0.5 + 0.4 * u[0]
            } else {
                0.5 + 0.4 * u[1] * if row % 2 == 0 { 1.0 } else { -1.0 }
            } + offset;
        }
        l
    }
}

fn toy_config(seed: u64) -> TrainConfig {
    TrainConfig {
        batch_size: 10,
        max_epochs: 3,
        patience: 5,
        seed,
        augment: false,
        adam: AdamParams {
            lr: 1e-3,
            ..AdamParams::default()
        },
    }
}

#[test]
fn toy_training_loss_strictly_decreases_and_is_deterministic() {
    let data = Toy::new(50, 12, 1);
    let val = Toy::new(20, 12, 2);
    let run = || {
        let mut net = Network::new(small_spec(12, false), LabelRanges::default(), 7).unwrap();
        let h = train(&mut net, &data, &val, &toy_config(3), |_| {}).unwrap();
        (net, h)
    };
    let (net1, h1) = run();
    let losses: Vec<f64> = h1.epochs.iter().map(|e| e.train_loss).collect();
    assert_eq!(losses.len(), 3);
    assert!(losses[1] < losses[0] && losses[2] < losses[1], "{losses:?}");
    let (net2, h2) = run();
    assert_eq!(h1, h2);
    assert_eq!(net1, net2);
}

#[test]
fn augmentation_changes_trained_weights() {
    let mut data = Toy::new(50, 12, 1);
    data.shift_on_augment = true;
    let val = Toy::new(20, 12, 2);
    let mut a = Network::new(small_spec(12, false), LabelRanges::default(), 7).unwrap();
    let mut b = a.clone();
    train(&mut a, &data, &val, &toy_config(3), |_| {}).unwrap();
    train(
        &mut b,
        &data,
        &val,
        &TrainConfig {
            augment: true,
            ..toy_config(3)
        },
        |_| {},
    )
    .unwrap();
    assert_ne!(a.params(), b.params());
}

#[test]
fn training_restores_best_validation_weights() {
    let data = Toy::new(40, 10, 4);
    let val = Toy::new(10, 10, 5);
    let mut net = Network::new(small_spec(10, false), LabelRanges::default(), 8).unwrap();
    let cfg = TrainConfig {
        max_epochs: 6,
        adam: AdamParams {
            lr: 0.05,
            ..AdamParams::default()
        },
        ..toy_config(9)
    };
    let h = train(&mut net, &data, &val, &cfg, |_| {}).unwrap();
    let final_val = tacservo::nn::evaluate_loss(&net, &val, 64).unwrap();
    assert_eq!(final_val, h.best_val_loss);
    let min = h
        .epochs
        .iter()
        .map(|e| e.val_loss)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(min, h.best_val_loss);
}
