//! Random states and observables for randomized checks.

use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;
use rand::Rng;

use crate::C64;

use super::{Operator, StateVector};

/// Standard normal variate by Box-Muller.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(standard_normal(rng), standard_normal(rng))
}

/// Haar-distributed pure state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    let coeffs: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
    StateVector::normalized(coeffs).expect("gaussian vector is nonzero")
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let mut data = alloc::vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        data[i * dim + i] = C64::new(standard_normal(rng), 0.0);
        for j in i + 1..dim {
            let z = complex_normal(rng) * core::f64::consts::FRAC_1_SQRT_2;
            data[i * dim + j] = z;
            data[j * dim + i] = z.conj();
        }
    }
    Operator::from_raw(dim, data)
}
