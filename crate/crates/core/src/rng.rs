//! Seeded random streams and complex Gaussian sampling.
//!
//! Every stochastic routine takes its generator explicitly. Independent
//! streams are carved out of one base seed with ChaCha's 64-bit stream id so
//! that trials can run in any order and still reproduce bit for bit.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::Real;

/// Generator used throughout the crate.
pub type Stream = ChaCha8Rng;

/// What a derived stream is used for. Keeps channel draws, random RIS
/// baselines and optimizer randomization mutually independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    Channel = 1,
    RandomConfig = 2,
    Optimizer = 3,
    Oracle = 4,
}

/// Root stream for `seed`.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream keyed by `(seed, cell, trial, purpose)`.
pub fn derived_stream(seed: u64, cell: u32, trial: u32, purpose: Purpose) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 24 bits of cell, 32 of trial, 8 of purpose.
    let id = ((cell as u64 & 0xff_ffff) << 40) | ((trial as u64) << 8) | purpose as u64;
    rng.set_stream(id);
    rng
}

/// One standard circularly-symmetric complex normal: unit total variance,
/// each quadrature scaled by 1/sqrt(2).
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(
        T::lit(re * std::f64::consts::FRAC_1_SQRT_2),
        T::lit(im * std::f64::consts::FRAC_1_SQRT_2),
    )
}

/// Complex normal with variance `variance`.
pub fn complex_normal_scaled<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    complex_normal::<T, R>(rng) * variance.sqrt()
}

pub fn complex_normal_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<Complex<T>> {
    DVector::from_fn(len, |_, _| complex_normal(rng))
}

/// Column-major fill, so draws are stable across matrix shapes with equal length.
pub fn complex_normal_matrix<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> DMatrix<Complex<T>> {
    let data: Vec<Complex<T>> = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Uniform phase in [0, 2π).
pub fn uniform_phase<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    use rand::RngExt;
    T::lit(rng.random::<f64>() * std::f64::consts::TAU)
}
