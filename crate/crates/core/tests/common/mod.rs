#![allow(dead_code)]

use jacobi_bc::JacobiCoefficients;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `a_1..a_{n-1}` in [0.5, 2], `b_1..b_n` in [-1, 1].
pub fn random_coeffs(rng: &mut StdRng, n: usize) -> JacobiCoefficients {
    let a: Vec<f64> = (1..n).map(|_| rng.random_range(0.5..=2.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    JacobiCoefficients::from_tail(&a, &b).unwrap()
}

pub fn tails(c: &JacobiCoefficients, n: usize) -> (Vec<f64>, Vec<f64>) {
    ((1..n).map(|k| c.a(k).unwrap()).collect(), (1..=n).map(|k| c.b(k).unwrap()).collect())
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Same ranges as [`random_coeffs`], on the grid `k / 64`, so that exact
/// rational arithmetic stays cheap.
pub fn random_dyadic_coeffs(rng: &mut StdRng, n: usize) -> JacobiCoefficients {
    let a: Vec<f64> = (1..n).map(|_| rng.random_range(32..=128) as f64 / 64.0).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(-64..=64) as f64 / 64.0).collect();
    JacobiCoefficients::from_tail(&a, &b).unwrap()
}
