//! Angle statistics estimation and scalar codebook training.
//!
//! Samples beamformers from i.i.d. Rayleigh channels (the eigen-
//! beamforming pipeline: channel draw, SVD, phase normalization, leading
//! columns), turns them into rotation/phase angles, and estimates their
//! distributions. [`lloyd_train_psi`] fits a k-level scalar codebook to
//! rotation-angle samples under squared angle error.

use rand::Rng;
use rayon::prelude::*;

use crate::cxmat::{phase_normalize, svd, ComplexMatrix};
use crate::givens::{gr_decompose, GivensParams, GrDims};
use crate::quantizer::PsiQuantizer;
use crate::rng::{complex_gaussian_matrix, trial_rng};
use crate::{Error, Result};

/// Smallest sample count accepted by the estimation routines.
pub const MIN_ESTIMATION_SAMPLES: usize = 10_000;

/// One beamformer draw: `n_t x n_t` i.i.d. unit-variance complex Gaussian
/// channel, right singular vectors, phase normalization, first `k`
/// columns.
pub fn sample_beamformer(dims: GrDims, rng: &mut impl Rng) -> ComplexMatrix {
    let h = complex_gaussian_matrix(rng, dims.n_t(), dims.n_t());
    let v = svd(&h)
        .expect("channel dims are within the supported range")
        .v;
    phase_normalize(&v).0.leading_columns(dims.k())
}

/// Draws `n` independent angle parameter sets, deterministically from
/// `seed`. Sample `i` depends only on `(seed, i)`, so the stream may be
/// generated in parallel.
pub fn sample_gr_params(dims: GrDims, n: usize, seed: u64) -> Result<Vec<GivensParams>> {
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let w = sample_beamformer(dims, &mut rng);
            gr_decompose(&w, dims).expect("sampled beamformers are unitary by construction")
        })
        .collect())
}

/// Histogram of one angle parameter.
#[derive(Debug, Clone)]
pub struct AngleHistogram {
    /// Parameter label, e.g. `psi21`.
    pub param: String,
    /// Ascending bin edges; `counts.len() + 1` entries.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub sample_size: u64,
}

impl AngleHistogram {
    /// Uniform-bin histogram over `[0, range]`.
    pub fn from_samples(param: &str, range: f64, bins: usize, samples: &[f64]) -> Self {
        let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * range / bins as f64).collect();
        let mut counts = vec![0u64; bins];
        for &x in samples {
            let mut b = ((x / range) * bins as f64).floor() as usize;
            if b >= bins {
                b = bins - 1;
            }
            counts[b] += 1;
        }
        Self {
            param: param.to_string(),
            edges,
            counts,
            sample_size: samples.len() as u64,
        }
    }

    /// Fraction of samples below `split` minus the fraction above.
    pub fn mass_imbalance(&self, split: f64) -> f64 {
        let mut low = 0u64;
        let mut high = 0u64;
        for (i, &c) in self.counts.iter().enumerate() {
            let mid = 0.5 * (self.edges[i] + self.edges[i + 1]);
            if mid < split {
                low += c;
            } else {
                high += c;
            }
        }
        (low as f64 - high as f64) / self.sample_size as f64
    }
}

/// Per-parameter angle samples for a shape: phases and rotations in
/// canonical order.
pub struct AngleSamples {
    pub dims: GrDims,
    /// `phi_samples[a][i]` is draw `i` of the `a`-th phase.
    pub phi_samples: Vec<Vec<f64>>,
    pub psi_samples: Vec<Vec<f64>>,
}

/// Collects per-parameter samples for distribution estimation.
pub fn collect_angle_samples(dims: GrDims, n: usize, seed: u64) -> Result<AngleSamples> {
    if n < MIN_ESTIMATION_SAMPLES {
        return Err(Error::Config(format!(
            "estimation needs at least {MIN_ESTIMATION_SAMPLES} samples, got {n}"
        )));
    }
    let params = sample_gr_params(dims, n, seed)?;
    let mut phi_samples = vec![Vec::with_capacity(n); dims.phi_count()];
    let mut psi_samples = vec![Vec::with_capacity(n); dims.psi_count()];
    for p in &params {
        for (a, v) in p.phi_flat().into_iter().enumerate() {
            phi_samples[a].push(v);
        }
        for (a, v) in p.psi_flat().into_iter().enumerate() {
            psi_samples[a].push(v);
        }
    }
    Ok(AngleSamples {
        dims,
        phi_samples,
        psi_samples,
    })
}

/// Relative frequencies of nearest-level indices per rotation angle.
pub fn estimate_psi_symbol_probs(
    dims: GrDims,
    quantizer: &PsiQuantizer,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let samples = collect_angle_samples(dims, n, seed)?;
    Ok(samples
        .psi_samples
        .iter()
        .map(|col| {
            let mut counts = vec![0u64; quantizer.size()];
            for &x in col {
                counts[quantizer.nearest(x)] += 1;
            }
            counts
                .iter()
                .map(|&c| c as f64 / col.len() as f64)
                .collect()
        })
        .collect())
}

/// Kolmogorov-Smirnov statistic of `samples` against the uniform
/// distribution on `[0, range]`.
pub fn ks_uniform_statistic(samples: &[f64], range: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = (x / range).clamp(0.0, 1.0);
        worst = worst.max((cdf - i as f64 / n).abs());
        worst = worst.max(((i + 1) as f64 / n - cdf).abs());
    }
    worst
}

/// Scalar codebook fitted by Lloyd iteration.
#[derive(Debug, Clone)]
pub struct TrainedCodebook {
    /// Ascending level values.
    pub levels: Vec<f64>,
    /// Final cell masses, same order as `levels`.
    pub probs: Vec<f64>,
    /// Mean squared angle error at convergence.
    pub distortion: f64,
    /// Distortion after every iteration (for monotonicity checks).
    pub trace: Vec<f64>,
}

impl TrainedCodebook {
    pub fn to_psi_codebook(&self) -> Result<crate::quantizer::PsiCodebook> {
        crate::quantizer::PsiCodebook::new(self.levels.clone())
    }
}

const LLOYD_MAX_ITERS: usize = 200;
const LLOYD_REL_TOL: f64 = 1e-8;

/// Fits `k` levels to rotation-angle samples by Lloyd iteration on
/// squared angle error: nearest-level partition, then centroid update,
/// until the relative distortion change drops below 1e-8. Seeded
/// spread-style initialization; empty cells are repaired by splitting the
/// highest-distortion cell.
pub fn lloyd_train_psi(samples: &[f64], k: usize, seed: u64) -> Result<TrainedCodebook> {
    if samples.is_empty() {
        return Err(Error::Validation("no training samples".into()));
    }
    if k == 0 {
        return Err(Error::Validation("level count must be at least 1".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut distinct = sorted.clone();
    distinct.dedup();
    if k > distinct.len() {
        return Err(Error::Validation(format!(
            "asked for {k} levels but only {} distinct samples",
            distinct.len()
        )));
    }

    // Spread the initial levels: first one drawn at random, the rest by
    // farthest-point selection over the sample quantiles.
    let mut rng = trial_rng(seed, 0);
    let mut levels: Vec<f64> = Vec::with_capacity(k);
    let quantiles: Vec<f64> = (0..(4 * k).min(distinct.len()))
        .map(|i| {
            let q = (i as f64 + 0.5) / (4 * k).min(distinct.len()) as f64;
            sorted[((q * sorted.len() as f64) as usize).min(sorted.len() - 1)]
        })
        .collect();
    levels.push(quantiles[rng.gen_range(0..quantiles.len())]);
    while levels.len() < k {
        let far = quantiles
            .iter()
            .filter(|q| !levels.contains(q))
            .max_by(|a, b| {
                let da = levels
                    .iter()
                    .map(|l| (*a - l).abs())
                    .fold(f64::INFINITY, f64::min);
                let db = levels
                    .iter()
                    .map(|l| (*b - l).abs())
                    .fold(f64::INFINITY, f64::min);
                da.partial_cmp(&db).unwrap()
            })
            .copied();
        match far {
            Some(q) => levels.push(q),
            // Quantile pool exhausted (tiny sample sets): fall back to
            // unused distinct sample values.
            None => {
                let q = distinct
                    .iter()
                    .find(|v| !levels.contains(v))
                    .expect("k <= distinct count");
                levels.push(*q);
            }
        }
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut trace = Vec::new();
    let mut assignment = vec![0usize; sorted.len()];
    let mut masses = vec![0usize; k];
    for _iter in 0..LLOYD_MAX_ITERS {
        // Partition.
        masses.iter_mut().for_each(|m| *m = 0);
        let mut distortion = 0.0;
        let mut cell_err = vec![0.0f64; k];
        for (s, &x) in sorted.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, &l) in levels.iter().enumerate() {
                let d = (x - l).abs();
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            assignment[s] = best;
            masses[best] += 1;
            distortion += best_d * best_d;
            cell_err[best] += best_d * best_d;
        }
        distortion /= sorted.len() as f64;
        trace.push(distortion);

        // Empty-cell repair: move the empty level into the worst cell.
        if let Some(empty) = masses.iter().position(|&m| m == 0) {
            let worst = cell_err
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(j, _)| j)
                .unwrap();
            let far = sorted
                .iter()
                .enumerate()
                .filter(|(s, _)| assignment[*s] == worst)
                .max_by(|a, b| {
                    let da = (a.1 - levels[worst]).abs();
                    let db = (b.1 - levels[worst]).abs();
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(_, &x)| x)
                .unwrap();
            levels[empty] = far;
            levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
            continue;
        }

        // Centroid update.
        let mut sums = vec![0.0f64; k];
        for (s, &x) in sorted.iter().enumerate() {
            sums[assignment[s]] += x;
        }
        let mut moved = 0.0f64;
        for j in 0..k {
            let c = sums[j] / masses[j] as f64;
            moved = moved.max((c - levels[j]).abs());
            levels[j] = c;
        }
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());

        if trace.len() >= 2 {
            let prev = trace[trace.len() - 2];
            let cur = trace[trace.len() - 1];
            if (prev - cur).abs() <= LLOYD_REL_TOL * prev.max(1e-30) && moved < 1e-12 {
                break;
            }
        }
    }

    // Final partition statistics at the converged levels.
    let mut counts = vec![0u64; k];
    let mut distortion = 0.0;
    for &x in &sorted {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, &l) in levels.iter().enumerate() {
            let d = (x - l).abs();
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        counts[best] += 1;
        distortion += best_d * best_d;
    }
    distortion /= sorted.len() as f64;
    trace.push(distortion);

    Ok(TrainedCodebook {
        levels,
        probs: counts
            .iter()
            .map(|&c| c as f64 / sorted.len() as f64)
            .collect(),
        distortion,
        trace,
    })
}
