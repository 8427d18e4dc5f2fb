//! Seeded, counter-based randomness.
//!
//! All sampling goes through ChaCha8 streams keyed by `(seed, stream)`, so a
//! computation is a pure function of its seed and the stream label it uses.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream labels used across the crate. Distinct labels keep independent
/// samplers from sharing random numbers.
pub mod stream {
    pub const HULL_SAMPLES: u64 = 1;
    pub const HAMILTON: u64 = 2;
    pub const DYADIC_DIRECTIONS: u64 = 3;
    pub const RECHECK: u64 = 4;
    pub const MODULUS: u64 = 5;
    pub const PROBE: u64 = 6;
    pub const PALETTE: u64 = 7;
    pub const WITNESS: u64 = 8;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal sample via Box-Muller.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_iterator(dim, (0..dim).map(|_| gaussian(rng)))
}

/// Uniform direction on the Euclidean unit sphere.
pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, dim);
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Gaussian coefficients damped by `(1 + k)^{-p}`, mixing smooth and rough
/// test vectors.
pub fn mixed_decay<R: Rng + ?Sized>(rng: &mut R, dim: usize, p: usize) -> DVector<f64> {
    DVector::from_fn(dim, |k, _| gaussian(rng) * ((1 + k) as f64).powi(-(p as i32)))
}
