//! Closed-loop Monte Carlo link evaluation.
//!
//! Each trial draws an i.i.d. Rayleigh block-fading channel, computes the
//! eigen-beamformer, sends the quantized feedback through the configured
//! scheme, transmits Gray-mapped symbols through the (mismatched)
//! beamformer, and decodes with either the parallel per-stream slicer or
//! an MMSE equalizer trained on the effective channel. Channel, noise and
//! data draws depend only on `(seed, trial index)`, so every scheme and
//! SNR point sees identical randomness (paired comparisons) and results
//! are bit-identical for any degree of parallelism.
//!
//! Conventions: total transmit energy 1 per channel use, split equally
//! across the `k` streams; the SNR axis is Es/N0 per receive antenna;
//! the MMSE regularizer is `alpha = N0 / (Es/k)` (noise over per-stream
//! symbol energy).

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::cxmat::{phase_normalize, svd, ComplexMatrix};
use crate::modulation::Modulation;
use crate::rng::{complex_gaussian, complex_gaussian_matrix, trial_rng};
use crate::scheme::{scheme_for, FeedbackScheme, SchemeId};
use crate::{Error, Result};

/// Effective singular value below which a stream counts as erased under
/// the parallel receiver (its bits flip with probability one half).
pub const ERASURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    /// Rotate by the left singular vectors and slice each stream alone.
    Parallel,
    /// Linear MMSE on the known effective channel.
    Mmse,
}

impl std::fmt::Display for Receiver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Parallel => write!(f, "parallel"),
            Self::Mmse => write!(f, "mmse"),
        }
    }
}

impl std::str::FromStr for Receiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parallel" => Ok(Self::Parallel),
            "mmse" => Ok(Self::Mmse),
            other => Err(Error::Config(format!("unknown receiver {other:?}"))),
        }
    }
}

/// Full campaign description.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub k: usize,
    /// One modulation per stream.
    pub modulations: Vec<Modulation>,
    /// Es/N0 grid in dB.
    pub snr_db: Vec<f64>,
    pub schemes: Vec<SchemeId>,
    /// Trials per SNR point.
    pub trials: usize,
    pub receiver: Receiver,
    pub seed: u64,
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n_t.min(self.n_r) {
            return Err(Error::Config(format!(
                "k = {} must be in 1..=min(n_t, n_r) = {}",
                self.k,
                self.n_t.min(self.n_r)
            )));
        }
        let dims = self.dims()?;
        if self.modulations.len() != self.k {
            return Err(Error::Config(format!(
                "need {} per-stream modulations, got {}",
                self.k,
                self.modulations.len()
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("empty SNR grid".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes listed".into()));
        }
        for &id in &self.schemes {
            scheme_for(id, dims)?;
        }
        if self.n_r > crate::cxmat::MAX_DIM {
            return Err(Error::Config(format!(
                "n_r must be at most {}",
                crate::cxmat::MAX_DIM
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> Result<crate::givens::GrDims> {
        crate::givens::GrDims::new(self.n_t, self.k)
    }

    /// Stable hash of the campaign parameters, for output metadata.
    pub fn config_hash(&self) -> u64 {
        let repr = format!(
            "{}x{} k={} mods={:?} snr={:?} schemes={:?} trials={} rx={} seed={}",
            self.n_t,
            self.n_r,
            self.k,
            self.modulations
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>(),
            self.snr_db,
            self.schemes
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>(),
            self.trials,
            self.receiver,
            self.seed
        );
        // FNV-1a.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in repr.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Common random numbers for one trial index.
#[derive(Debug, Clone)]
pub struct TrialDraws {
    pub channel: ComplexMatrix,
    /// Unit-variance receive noise, scaled by sqrt(N0) per SNR point.
    pub noise_unit: Vec<Complex64>,
    /// Data bits per stream.
    pub bits: Vec<Vec<bool>>,
}

/// Draws channel, noise and data for trial `index`; depends only on
/// `(config.seed, index)` and the shape/modulation fields.
pub fn draw_trial(config: &LinkConfig, index: u64) -> TrialDraws {
    let mut rng = trial_rng(config.seed, index);
    let channel = complex_gaussian_matrix(&mut rng, config.n_r, config.n_t);
    let noise_unit: Vec<Complex64> = (0..config.n_r)
        .map(|_| complex_gaussian(&mut rng))
        .collect();
    let bits: Vec<Vec<bool>> = config
        .modulations
        .iter()
        .map(|m| (0..m.bits_per_symbol()).map(|_| rng.gen::<bool>()).collect())
        .collect();
    TrialDraws {
        channel,
        noise_unit,
        bits,
    }
}

/// Channel geometry shared by every scheme in a trial.
struct TrialGeometry {
    u: ComplexMatrix,
    /// Effective complex diagonal after phase normalization.
    d_bar: Vec<Complex64>,
    v_bar: ComplexMatrix,
    /// Ideal beamformer: leading `k` columns of `v_bar`.
    w: ComplexMatrix,
}

fn prepare_geometry(h: &ComplexMatrix, k: usize) -> TrialGeometry {
    let dec = svd(h).expect("channel dims validated");
    let (v_bar, sigma) = phase_normalize(&dec.v);
    let d_bar: Vec<Complex64> = dec
        .d
        .iter()
        .enumerate()
        .map(|(i, &s)| s * sigma.get(i, i))
        .collect();
    let w = v_bar.leading_columns(k);
    TrialGeometry {
        u: dec.u,
        d_bar,
        v_bar,
        w,
    }
}

/// Per-stream hard decision of the parallel receiver.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamDetection {
    /// Eigenmode too weak to slice; counts as coin-flip bits.
    Erased,
    Bits(Vec<bool>),
}

/// Rotates the received vector by the Hermitian of the left singular
/// vectors and slices each stream independently, ignoring quantization
/// cross-talk. `symbol_scale` is the per-stream amplitude sqrt(Es/k).
pub fn parallel_decode(
    y: &[Complex64],
    u: &ComplexMatrix,
    d_bar: &[Complex64],
    modulations: &[Modulation],
    symbol_scale: f64,
) -> Vec<StreamDetection> {
    let rotated = u.hermitian().mul_vec(y);
    modulations
        .iter()
        .enumerate()
        .map(|(s, m)| {
            if d_bar[s].norm() < ERASURE_TOL {
                StreamDetection::Erased
            } else {
                let z = rotated[s] / d_bar[s] / symbol_scale;
                StreamDetection::Bits(m.demap(z))
            }
        })
        .collect()
}

/// Linear MMSE equalizer: `(G^H G + alpha I)^{-1} G^H y` for the known
/// `k x k` effective channel `G`. Fails only when the regularized normal
/// matrix is singular, which requires `alpha = 0`.
pub fn mmse_decode(y_eff: &[Complex64], g: &ComplexMatrix, alpha: f64) -> Result<Vec<Complex64>> {
    let k = g.cols();
    assert_eq!(g.rows(), k, "effective channel must be square");
    assert_eq!(y_eff.len(), k, "observation length must match streams");
    let gh = g.hermitian();
    let mut a = gh.mul(g);
    for i in 0..k {
        a.set(i, i, a.get(i, i) + alpha);
    }
    let b = gh.mul_vec(y_eff);
    solve_linear(&a, &b)
}

/// Gaussian elimination with partial pivoting for the tiny Hermitian
/// systems above.
fn solve_linear(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row: Vec<Complex64> = (0..n).map(|j| a.get(i, j)).collect();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .norm_sqr()
                    .partial_cmp(&m[j][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        if m[pivot][col].norm_sqr() < 1e-300 {
            return Err(Error::Numerical("singular equalizer matrix".into()));
        }
        m.swap(col, pivot);
        let inv = Complex64::new(1.0, 0.0) / m[col][col];
        for j in col..=n {
            m[col][j] *= inv;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f.norm_sqr() > 0.0 {
                    for j in col..=n {
                        let sub = f * m[col][j];
                        m[row][j] -= sub;
                    }
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n]).collect())
}

/// Everything measured in one trial at one SNR point.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    /// Per-stream bit errors; half-counts come from erased streams.
    pub bit_errors: Vec<f64>,
    /// Per-stream bits sent.
    pub bits_sent: Vec<u64>,
    /// Squared Frobenius distortion of the quantized beamformer.
    pub mse: f64,
    /// Column-averaged angular distortion.
    pub mad: f64,
    /// Message length, or `None` for perfect feedback.
    pub feedback_bits: Option<u32>,
}

/// Runs one trial end to end. `scheme = None` bypasses quantization
/// (perfect feedback).
pub fn run_trial(
    h: &ComplexMatrix,
    scheme: Option<&FeedbackScheme>,
    receiver: Receiver,
    modulations: &[Modulation],
    n0: f64,
    noise_unit: &[Complex64],
    bits: &[Vec<bool>],
) -> Result<TrialOutcome> {
    let k = modulations.len();
    let geo = prepare_geometry(h, k);
    let (w_tilde, feedback_bits) = quantize_beamformer(&geo.w, scheme)?;
    let (mse, mad) = beamformer_distortion(&geo.w, &w_tilde);

    let scale = (1.0 / k as f64).sqrt();
    let symbols: Vec<Complex64> = modulations
        .iter()
        .zip(bits)
        .map(|(m, b)| m.map(b).map(|s| s * scale))
        .collect::<Result<_>>()?;
    let x = w_tilde.mul_vec(&symbols);
    let y: Vec<Complex64> = h
        .mul_vec(&x)
        .into_iter()
        .zip(noise_unit)
        .map(|(s, &n)| s + n * n0.sqrt())
        .collect();

    let mut bit_errors = vec![0.0f64; k];
    let mut bits_sent = vec![0u64; k];
    match receiver {
        Receiver::Parallel => {
            let detections = parallel_decode(&y, &geo.u, &geo.d_bar, modulations, scale);
            for (s, det) in detections.iter().enumerate() {
                bits_sent[s] = bits[s].len() as u64;
                match det {
                    StreamDetection::Erased => bit_errors[s] = bits[s].len() as f64 / 2.0,
                    StreamDetection::Bits(rx) => {
                        bit_errors[s] =
                            rx.iter().zip(&bits[s]).filter(|(a, b)| a != b).count() as f64;
                    }
                }
            }
        }
        Receiver::Mmse => {
            let g = effective_channel(&geo, &w_tilde, k);
            let rotated = geo.u.hermitian().mul_vec(&y);
            let alpha = n0 * k as f64;
            let equalized = mmse_decode(&rotated[..k], &g, alpha)?;
            for (s, m) in modulations.iter().enumerate() {
                bits_sent[s] = bits[s].len() as u64;
                let rx = m.demap(equalized[s] / scale);
                bit_errors[s] = rx.iter().zip(&bits[s]).filter(|(a, b)| a != b).count() as f64;
            }
        }
    }
    Ok(TrialOutcome {
        bit_errors,
        bits_sent,
        mse,
        mad,
        feedback_bits,
    })
}

fn quantize_beamformer(
    w: &ComplexMatrix,
    scheme: Option<&FeedbackScheme>,
) -> Result<(ComplexMatrix, Option<u32>)> {
    match scheme {
        None => Ok((w.clone(), None)),
        Some(s) => {
            let q = s.quantize_matrix(w)?;
            let bits = q.total_bits();
            Ok((s.reconstruct_matrix(&q)?, Some(bits)))
        }
    }
}

/// Leading `k x k` block of the effective channel `diag(d_bar) v_barH w`.
fn effective_channel(geo: &TrialGeometry, w_tilde: &ComplexMatrix, k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(k, k, |s, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..geo.v_bar.rows() {
            acc += geo.v_bar.get(m, s).conj() * w_tilde.get(m, j);
        }
        geo.d_bar[s] * acc
    })
}

/// Frobenius-squared and column-averaged angular distortion between the
/// ideal and quantized beamformers. The angular term uses the real part
/// of the per-column inner product; both columns sit in the gauge fixed
/// by phase normalization.
fn beamformer_distortion(w: &ComplexMatrix, w_tilde: &ComplexMatrix) -> (f64, f64) {
    let mut mse = 0.0;
    let mut mad = 0.0;
    for j in 0..w.cols() {
        let mut dot = Complex64::new(0.0, 0.0);
        let mut col_mse = 0.0;
        for i in 0..w.rows() {
            let d = w.get(i, j) - w_tilde.get(i, j);
            col_mse += d.norm_sqr();
            dot += w.get(i, j).conj() * w_tilde.get(i, j);
        }
        mse += col_mse;
        // Bitwise-identical columns are exactly aligned; skip the sqrt so
        // rounding in the inner product cannot manufacture distortion.
        if col_mse > 0.0 {
            mad += (1.0 - dot.re * dot.re).max(0.0).sqrt();
        }
    }
    (mse, mad / w.cols() as f64)
}

/// Distortion and rate statistics of a scheme over random channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerStats {
    pub mse: f64,
    pub mad: f64,
    pub avg_bits: f64,
}

/// Monte Carlo estimate of beamformer distortion for `scheme_id` over `n`
/// Rayleigh channels (at least 10^4 for stable estimates).
pub fn evaluate_quantizer(
    dims: crate::givens::GrDims,
    scheme_id: SchemeId,
    n: usize,
    seed: u64,
) -> Result<QuantizerStats> {
    if n < crate::codebook::MIN_ESTIMATION_SAMPLES {
        return Err(Error::Config(format!(
            "need at least {} channels, got {n}",
            crate::codebook::MIN_ESTIMATION_SAMPLES
        )));
    }
    let scheme = scheme_for(scheme_id, dims)?;
    let chunks = chunk_ranges(n, 4096);
    let partials: Vec<(f64, f64, f64)> = chunks
        .into_par_iter()
        .map(|range| {
            let mut acc = (0.0, 0.0, 0.0);
            for i in range {
                let mut rng = trial_rng(seed, i as u64);
                let w = crate::codebook::sample_beamformer(dims, &mut rng);
                let (wt, fb) =
                    quantize_beamformer(&w, scheme.as_ref()).expect("sampled beamformer is valid");
                let (mse, mad) = beamformer_distortion(&w, &wt);
                acc.0 += mse;
                acc.1 += mad;
                acc.2 += fb.map_or(0.0, |b| b as f64);
            }
            acc
        })
        .collect();
    let (mse, mad, bits) = partials
        .into_iter()
        .fold((0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(QuantizerStats {
        mse: mse / n as f64,
        mad: mad / n as f64,
        avg_bits: if scheme_id == SchemeId::A {
            f64::INFINITY
        } else {
            bits / n as f64
        },
    })
}

/// One (scheme, SNR, stream) error counter.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub stream: usize,
    pub bits_sent: u64,
    pub bit_errors: f64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        if self.bits_sent == 0 {
            0.0
        } else {
            self.bit_errors / self.bits_sent as f64
        }
    }

    /// Binomial standard error of the BER estimate.
    pub fn sigma(&self) -> f64 {
        if self.bits_sent == 0 {
            return 0.0;
        }
        let p = self.ber().clamp(0.0, 1.0);
        (p * (1.0 - p) / self.bits_sent as f64).sqrt()
    }
}

/// Monte Carlo results for one scheme across the SNR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    pub scheme: SchemeId,
    pub mse: f64,
    pub mad: f64,
    /// Average feedback message length; infinite for perfect feedback.
    pub avg_feedback_bits: f64,
    /// Indexed by (snr, stream), snr-major.
    pub points: Vec<BerPoint>,
    pub trials: usize,
}

impl SchemeResult {
    pub fn point(&self, snr_idx: usize, stream: usize, k: usize) -> &BerPoint {
        &self.points[snr_idx * k + stream]
    }
}

fn chunk_ranges(n: usize, width: usize) -> Vec<std::ops::Range<usize>> {
    (0..n.div_ceil(width))
        .map(|c| c * width..((c + 1) * width).min(n))
        .collect()
}

#[derive(Clone)]
struct CampaignAccum {
    // [scheme][snr][stream]
    errors: Vec<Vec<Vec<f64>>>,
    bits: Vec<Vec<Vec<u64>>>,
    mse: Vec<f64>,
    mad: Vec<f64>,
    fb_bits: Vec<f64>,
}

impl CampaignAccum {
    fn new(schemes: usize, snrs: usize, streams: usize) -> Self {
        Self {
            errors: vec![vec![vec![0.0; streams]; snrs]; schemes],
            bits: vec![vec![vec![0; streams]; snrs]; schemes],
            mse: vec![0.0; schemes],
            mad: vec![0.0; schemes],
            fb_bits: vec![0.0; schemes],
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        for s in 0..self.mse.len() {
            self.mse[s] += other.mse[s];
            self.mad[s] += other.mad[s];
            self.fb_bits[s] += other.fb_bits[s];
            for p in 0..self.errors[s].len() {
                for st in 0..self.errors[s][p].len() {
                    self.errors[s][p][st] += other.errors[s][p][st];
                    self.bits[s][p][st] += other.bits[s][p][st];
                }
            }
        }
        self
    }
}

/// Runs the full campaign: every scheme and SNR point sees the same
/// channel/noise/data draws per trial index.
pub fn run_campaign(config: &LinkConfig) -> Result<Vec<SchemeResult>> {
    config.validate()?;
    let dims = config.dims()?;
    let schemes: Vec<Option<FeedbackScheme>> = config
        .schemes
        .iter()
        .map(|&id| scheme_for(id, dims))
        .collect::<Result<_>>()?;
    let n0s: Vec<f64> = config
        .snr_db
        .iter()
        .map(|&s| 10f64.powf(-s / 10.0))
        .collect();
    let k = config.k;
    let scale = (1.0 / k as f64).sqrt();

    // Fixed-width chunks folded in trial order keep float accumulation
    // identical for any thread count.
    let chunk_results: Vec<CampaignAccum> = chunk_ranges(config.trials, 1024)
        .into_par_iter()
        .map(|range| {
            let mut acc = CampaignAccum::new(schemes.len(), n0s.len(), k);
            for trial in range {
                let draws = draw_trial(config, trial as u64);
                let geo = prepare_geometry(&draws.channel, k);
                let symbols: Vec<Complex64> = config
                    .modulations
                    .iter()
                    .zip(&draws.bits)
                    .map(|(m, b)| m.map(b).expect("bit counts match modulation") * scale)
                    .collect();
                for (si, scheme) in schemes.iter().enumerate() {
                    let (w_tilde, fb) = quantize_beamformer(&geo.w, scheme.as_ref())
                        .expect("sampled beamformer is valid");
                    let (mse, mad) = beamformer_distortion(&geo.w, &w_tilde);
                    acc.mse[si] += mse;
                    acc.mad[si] += mad;
                    acc.fb_bits[si] += fb.map_or(0.0, |b| b as f64);
                    let x = w_tilde.mul_vec(&symbols);
                    let hx = draws.channel.mul_vec(&x);
                    let g = match config.receiver {
                        Receiver::Mmse => Some(effective_channel(&geo, &w_tilde, k)),
                        Receiver::Parallel => None,
                    };
                    for (pi, &n0) in n0s.iter().enumerate() {
                        let y: Vec<Complex64> = hx
                            .iter()
                            .zip(&draws.noise_unit)
                            .map(|(s, &n)| s + n * n0.sqrt())
                            .collect();
                        match config.receiver {
                            Receiver::Parallel => {
                                let det = parallel_decode(
                                    &y,
                                    &geo.u,
                                    &geo.d_bar,
                                    &config.modulations,
                                    scale,
                                );
                                for (st, d) in det.iter().enumerate() {
                                    acc.bits[si][pi][st] += draws.bits[st].len() as u64;
                                    acc.errors[si][pi][st] += match d {
                                        StreamDetection::Erased => {
                                            draws.bits[st].len() as f64 / 2.0
                                        }
                                        StreamDetection::Bits(rx) => rx
                                            .iter()
                                            .zip(&draws.bits[st])
                                            .filter(|(a, b)| a != b)
                                            .count()
                                            as f64,
                                    };
                                }
                            }
                            Receiver::Mmse => {
                                let rotated = geo.u.hermitian().mul_vec(&y);
                                let alpha = n0 * k as f64;
                                let eq = mmse_decode(&rotated[..k], g.as_ref().unwrap(), alpha)
                                    .expect("alpha > 0 keeps the system regular");
                                for (st, m) in config.modulations.iter().enumerate() {
                                    let rx = m.demap(eq[st] / scale);
                                    acc.bits[si][pi][st] += draws.bits[st].len() as u64;
                                    acc.errors[si][pi][st] +=
                                        rx.iter()
                                            .zip(&draws.bits[st])
                                            .filter(|(a, b)| a != b)
                                            .count() as f64;
                                }
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let acc = chunk_results
        .into_iter()
        .reduce(|a, b| a.merge(&b))
        .expect("at least one chunk");

    let results = config
        .schemes
        .iter()
        .enumerate()
        .map(|(si, &id)| {
            let mut points = Vec::with_capacity(n0s.len() * k);
            for (pi, &snr) in config.snr_db.iter().enumerate() {
                for st in 0..k {
                    points.push(BerPoint {
                        snr_db: snr,
                        stream: st,
                        bits_sent: acc.bits[si][pi][st],
                        bit_errors: acc.errors[si][pi][st],
                    });
                }
            }
            SchemeResult {
                scheme: id,
                mse: acc.mse[si] / config.trials as f64,
                mad: acc.mad[si] / config.trials as f64,
                avg_feedback_bits: if id == SchemeId::A {
                    f64::INFINITY
                } else {
                    acc.fb_bits[si] / config.trials as f64
                },
                points,
                trials: config.trials,
            }
        })
        .collect();
    Ok(results)
}

/// CSV body for campaign results: one row per (scheme, snr, stream), with
/// a metadata preamble carrying the config hash and seed.
pub fn campaign_csv(config: &LinkConfig, results: &[SchemeResult]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config_hash={:016x}\n", config.config_hash()));
    out.push_str(&format!("# seed={}\n", config.seed));
    out.push_str(&format!("# receiver={}\n", config.receiver));
    out.push_str(
        "scheme,snr_db,stream,bits_sent,bit_errors,ber,mse,mad,avg_feedback_bits,trials\n",
    );
    for r in results {
        for p in &r.points {
            out.push_str(&format!(
                "{},{},{},{},{},{:.6e},{:.6e},{:.6e},{},{}\n",
                r.scheme,
                p.snr_db,
                p.stream,
                p.bits_sent,
                p.bit_errors,
                p.ber(),
                r.mse,
                r.mad,
                if r.avg_feedback_bits.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{:.4}", r.avg_feedback_bits)
                },
                r.trials
            ));
        }
    }
    out
}
