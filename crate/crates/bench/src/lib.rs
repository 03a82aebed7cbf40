//! Shared fixtures for the pipeline benchmarks.

use beamquant_core::codebook::sample_beamformer;
use beamquant_core::givens::GrDims;
use beamquant_core::rng::{complex_gaussian_matrix, trial_rng};
use beamquant_core::ComplexMatrix;

/// Deterministic batch of channel matrices.
pub fn channels(n_r: usize, n_t: usize, n: usize, seed: u64) -> Vec<ComplexMatrix> {
    (0..n as u64)
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            complex_gaussian_matrix(&mut rng, n_r, n_t)
        })
        .collect()
}

/// Deterministic batch of phase-normalized beamformers.
pub fn beamformers(dims: GrDims, n: usize, seed: u64) -> Vec<ComplexMatrix> {
    (0..n as u64)
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            sample_beamformer(dims, &mut rng)
        })
        .collect()
}
