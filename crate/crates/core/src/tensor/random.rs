use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DenseMatrix;
use crate::error::{invalid, Result};

/// ChaCha8: a counter-based stream cipher generator whose output is fixed by
/// the seed on every platform.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a base seed with a path of stream coordinates (snapshot, epoch, ...)
/// into an independent child seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Fills `out` with i.i.d. N(0, 1) draws using the Box–Muller transform.
pub fn standard_normal_fill<R: Rng>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_mut(2);
    for pair in &mut chunks {
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = core::f64::consts::TAU * u2;
        pair[0] = radius * libm::cos(angle);
        if let Some(second) = pair.get_mut(1) {
            *second = radius * libm::sin(angle);
        }
    }
}

pub fn sample_standard_normal(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(invalid("sample size must be positive"));
    }
    let mut m = DenseMatrix::zeros(rows, cols);
    standard_normal_fill(&mut rng_from_seed(seed), m.as_mut_slice());
    Ok(m)
}

/// Glorot/Xavier uniform initialization on `[-r, r]`, `r = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    if rows + cols == 0 {
        return m;
    }
    let range = libm::sqrt(6.0 / (rows + cols) as f64);
    for v in m.as_mut_slice() {
        *v = (2.0 * rng.random::<f64>() - 1.0) * range;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = sample_standard_normal(7, 3, 42).unwrap();
        let b = sample_standard_normal(7, 3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let a = sample_standard_normal(4, 4, 1).unwrap();
        let b = sample_standard_normal(4, 4, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn moments_of_ten_thousand_draws() {
        let m = sample_standard_normal(100, 100, 9).unwrap();
        let n = m.as_slice().len() as f64;
        let mean = m.as_slice().iter().sum::<f64>() / n;
        let var = m.as_slice().iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn odd_length_fill_and_zero_size() {
        let m = sample_standard_normal(1, 3, 5).unwrap();
        assert!(m.is_finite());
        assert!(sample_standard_normal(0, 3, 5).is_err());
    }

    #[test]
    fn derived_seeds_depend_on_every_coordinate() {
        let a = derive_seed(7, &[0, 1]);
        assert_ne!(a, derive_seed(7, &[1, 0]));
        assert_ne!(a, derive_seed(8, &[0, 1]));
        assert_eq!(a, derive_seed(7, &[0, 1]));
    }

    #[test]
    fn glorot_respects_range() {
        let w = glorot_uniform(&mut rng_from_seed(3), 10, 6);
        let r = libm::sqrt(6.0 / 16.0);
        assert!(w.as_slice().iter().all(|v| v.abs() <= r));
    }
}
