//! Seed-derived random substreams.
//!
//! Every Monte Carlo loop in this crate derives one independent ChaCha
//! stream per trial index, so trials can run in any order (or in parallel)
//! and still reproduce bit-identical results for a given master seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cxmat::ComplexMatrix;

/// SplitMix64 step, used to whiten (seed, index) pairs.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent deterministic stream for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// One standard normal sample (Box-Muller; the second draw is discarded).
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        if u1 > 1e-300 {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

/// Circularly symmetric complex Gaussian with unit variance
/// (real and imaginary parts each N(0, 1/2)).
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(standard_normal(rng) * s, standard_normal(rng) * s)
}

/// Matrix with i.i.d. unit-variance complex Gaussian entries, drawn in
/// row-major order.
pub fn complex_gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, complex_gaussian(rng));
        }
    }
    m
}
