use rand::Rng;

use super::Tensor;
use crate::rng;

/// Fan-in and fan-out for a weight shape: `[out, in]` for dense layers and
/// `[filters, channels, kh, kw]` for convolutions (receptive field counted
/// on both sides).
pub fn fans(shape: &[usize]) -> (usize, usize) {
    match shape {
        [out, inp] => (*inp, *out),
        [f, c, rest @ ..] => {
            let field: usize = rest.iter().product();
            (c * field, f * field)
        }
        _ => panic!("glorot init needs at least 2 dimensions, got {shape:?}"),
    }
}

pub fn glorot_bound(shape: &[usize]) -> f64 {
    let (fan_in, fan_out) = fans(shape);
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Uniform samples in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Tensor {
    let bound = glorot_bound(shape);
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-bound..bound)).collect();
    Tensor::from_vec(shape, data).expect("shape product matches")
}

/// `glorot_uniform_init`: deterministic per `seed`.
pub fn glorot_uniform_init(shape: &[usize], seed: u64) -> Tensor {
    glorot_uniform(shape, &mut rng::stream(seed, &[0x6104]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_formula() {
        assert!((glorot_bound(&[100, 100]) - 0.173_205_080_756_887_7).abs() < 1e-12);
        assert_eq!(fans(&[8, 3, 5, 5]), (75, 200));
    }

    #[test]
    fn values_within_bound_and_centred() {
        let t = glorot_uniform_init(&[100, 100], 1);
        let bound = glorot_bound(&[100, 100]);
        assert!(t.data().iter().all(|v| v.abs() <= bound));
        let mean = t.data().iter().sum::<f64>() / t.len() as f64;
        assert!(mean.abs() < bound / 10.0);
    }

    #[test]
    fn seeded_determinism() {
        assert_eq!(
            glorot_uniform_init(&[16, 8, 3, 3], 9),
            glorot_uniform_init(&[16, 8, 3, 3], 9)
        );
        assert_ne!(
            glorot_uniform_init(&[16, 8, 3, 3], 9),
            glorot_uniform_init(&[16, 8, 3, 3], 10)
        );
    }
}
