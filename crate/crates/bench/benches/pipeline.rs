use criterion::{criterion_group, criterion_main, Criterion};
use rand::Rng;
use std::hint::black_box;
use tacservo::geometry::shapes;
use tacservo::nn::{build, ops, train_step, AdamState, Architecture, LabelRanges, Network, Tensor};
use tacservo::rng;
use tacservo::tactile::{ContactParams, SensorModel, ShearState, TapJitter};
use tacservo::Vec2;

fn random_tensor(shape: &[usize], seed: u64) -> Tensor {
    let mut r = rng::stream(seed, &[]);
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap()
}

fn geometry(c: &mut Criterion) {
    let clover = shapes::make_clover();
    let mut g = c.benchmark_group("geometry");
    g.bench_function("signed_distance_clover", |b| {
        let mut k = 0.0f64;
        b.iter(|| {
            k += 0.37;
            black_box(clover.signed_distance(Vec2::new(60.0 * k.cos(), 60.0 * k.sin())))
        })
    });
    g.finish();
}

fn tactile(c: &mut Criterion) {
    let disk = shapes::make_disk(shapes::DISK_RADIUS).unwrap();
    let pose = disk.pose_at(0.0, 1.0, 5.0);
    let contact = ContactParams::default();
    let mut g = c.benchmark_group("tactile");
    g.sample_size(20);
    for size in [64, 128] {
        let sensor = SensorModel::new(size);
        g.bench_function(format!("render_tap_{size}"), |b| {
            let mut r = rng::stream(1, &[size as u64]);
            b.iter(|| {
                sensor.render_tap(
                    &disk,
                    &pose,
                    &contact,
                    &ShearState::zero(),
                    &TapJitter::NONE,
                    &mut r,
                )
            })
        });
    }
    g.finish();
}

fn network(c: &mut Criterion) {
    let mut g = c.benchmark_group("nn");
    g.sample_size(10);
    let x = random_tensor(&[8, 16, 64, 64], 1);
    let w = random_tensor(&[16, 16, 3, 3], 2);
    let bias = Tensor::zeros(&[16]);
    g.bench_function("conv3x3_16to16_64px_batch8", |b| {
        b.iter(|| ops::conv2d_forward(black_box(&x), &w, &bias, 1, true).unwrap())
    });

    for arch in [Architecture::A, Architecture::B] {
        let mut net = Network::new(build(arch, 64).unwrap(), LabelRanges::default(), 3).unwrap();
        let mut adam = AdamState::for_tensors(Default::default(), net.params());
        let x = random_tensor(&[32, 1, 64, 64], 4);
        let y = random_tensor(&[32, 2], 5);
        let mut r = rng::stream(6, &[]);
        g.bench_function(format!("train_step_{arch}_64px_batch32"), |b| {
            b.iter(|| train_step(&mut net, &mut adam, &x, &y, &mut r).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, geometry, tactile, network);
criterion_main!(benches);
