//! Seeded, stream-splittable randomness and random-matrix sampling.
//!
//! Draws are keyed by a (seed, stream-id) pair on top of a counter-based
//! generator, so any (seed, stream) produces the same sequence on every
//! platform and independent streams can be handed to parallel workers
//! without coordination.

use super::matrix::ComplexMatrix;
use super::scalar::{cast, Scalar};
use crate::{Error, Result};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// A reproducible random stream identified by (seed, stream-id).
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh stream derived deterministically from this one's identity.
    /// Children with distinct `child` indices are independent.
    pub fn fork(&self, child: u64) -> Self {
        Self::new(self.seed, splitmix64(self.stream ^ splitmix64(child.wrapping_add(1))))
    }

    /// Uniform draw in [0, 1).
    pub fn uniform_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn normal<T: Scalar>(&mut self) -> T {
        let x: f64 = StandardNormal.sample(&mut self.rng);
        cast(x)
    }

    /// Complex standard normal: real and imaginary parts each of variance 1/2.
    pub fn complex_normal<T: Scalar>(&mut self) -> Complex<T> {
        let s = cast::<T>(std::f64::consts::FRAC_1_SQRT_2);
        let re = self.normal::<T>() * s;
        let im = self.normal::<T>() * s;
        Complex::new(re, im)
    }
}

/// Matrix with independent complex standard normal entries.
pub fn ginibre<T: Scalar>(rows: usize, cols: usize, rng: &mut RngStream) -> Result<ComplexMatrix<T>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("Ginibre sample with a zero dimension".into()));
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.complex_normal();
        }
    }
    Ok(m)
}

/// Unit column vector drawn from the unitarily invariant (Haar) measure,
/// obtained by normalizing a Ginibre column.
pub fn haar_state<T: Scalar>(dim: usize, rng: &mut RngStream) -> Result<ComplexMatrix<T>> {
    if dim == 0 {
        return Err(Error::InvalidInput("Haar state of dimension zero".into()));
    }
    loop {
        let v = ginibre::<T>(dim, 1, rng)?;
        let norm = v.frob_norm();
        if norm > cast(1e-6) {
            return Ok(v.scale_re(T::one() / norm));
        }
    }
}
