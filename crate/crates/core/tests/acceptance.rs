//! End-to-end acceptance suite.
//!
//! Each test prints one `[PASS]`/`[FAIL]` line (run with `--nocapture` to
//! see them on success) and asserts the documented tolerance.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::time::Instant;

use beamquant_core::codebook::{
    collect_angle_samples, estimate_psi_symbol_probs, ks_uniform_statistic, lloyd_train_psi,
    AngleHistogram,
};
use beamquant_core::cxmat::{phase_normalize, svd};
use beamquant_core::entropy::{build_huffman, decode_message, encode_message, FeedbackMessage};
use beamquant_core::givens::{gr_decompose, gr_reconstruct, GrDims};
use beamquant_core::linksim::{
    evaluate_quantizer, run_campaign, run_trial, LinkConfig, Receiver, SchemeResult,
};
use beamquant_core::modulation::Modulation;
use beamquant_core::quantizer::{QuantizedParams, UniformGrid};
use beamquant_core::rng::{complex_gaussian_matrix, trial_rng};
use beamquant_core::scheme::{
    scheme_e_reference_distribution, standard_scheme, SchemeId, PSI21_LEVEL_PROBS,
    PSI31_LEVEL_PROBS, REFERENCE_PSI_CODEBOOK,
};

fn pass(n: u32, msg: &str) {
    println!("[PASS] criterion {n}: {msg}");
}

#[test]
fn acceptance_01_gr_roundtrip() {
    let t0 = Instant::now();
    let shapes = [
        (2, 1, 2),
        (2, 2, 2),
        (3, 1, 4),
        (3, 2, 6),
        (3, 3, 6),
        (4, 1, 6),
        (4, 2, 10),
        (4, 3, 12),
        (4, 4, 12),
    ];
    let mut worst = 0.0f64;
    for (n_t, k, count) in shapes {
        let dims = GrDims::new(n_t, k).unwrap();
        assert_eq!(dims.param_count(), count, "{dims} parameter count");
        for idx in 0..10_000u64 {
            let mut rng = trial_rng(0xACC1, idx * 16 + (n_t * 4 + k) as u64);
            let h = complex_gaussian_matrix(&mut rng, n_t, n_t);
            let v = svd(&h).unwrap().v;
            let w = phase_normalize(&v).0.leading_columns(k);
            let p = gr_decompose(&w, dims).unwrap();
            let err = gr_reconstruct(&p).max_abs_diff(&w);
            worst = worst.max(err);
            assert!(err <= 1e-9, "{dims} trial {idx}: roundtrip error {err:.3e}");
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "roundtrip suite took {dt:?}");
    pass(
        1,
        &format!("GR roundtrip, 9 shapes x 1e4, worst {worst:.2e}, {dt:?}"),
    );
}

#[test]
fn acceptance_02_quantizer_grids() {
    // Closed forms for every tabulated width pairing.
    for b in 1..=4u8 {
        let g = UniformGrid::psi(b).unwrap();
        for (k, lv) in g.levels().into_iter().enumerate() {
            let want = k as f64 * PI / 2f64.powi(b as i32 + 1) + PI / 2f64.powi(b as i32 + 2);
            assert!((lv - want).abs() <= 1e-14);
            assert!(lv > 0.0 && lv < FRAC_PI_2);
        }
    }
    for b in 2..=6u8 {
        let g = UniformGrid::phi(b).unwrap();
        for (k, lv) in g.levels().into_iter().enumerate() {
            let want = k as f64 * PI / 2f64.powi(b as i32 - 1) + PI / 2f64.powi(b as i32);
            assert!((lv - want).abs() <= 1e-14);
            assert!(lv > 0.0 && lv < TAU);
        }
    }
    let deg: Vec<f64> = UniformGrid::psi(2)
        .unwrap()
        .levels()
        .iter()
        .map(|l| l.to_degrees())
        .collect();
    for (got, want) in deg.iter().zip(&[11.25, 33.75, 56.25, 78.75]) {
        assert!(
            (got - want).abs() < 1e-12,
            "2-bit grid {got} vs {want} degrees"
        );
    }
    pass(2, "mid-rise grid levels match closed forms to 1e-14");
}

#[test]
fn acceptance_03_distortion_reproduction_3x1() {
    let t0 = Instant::now();
    let dims = GrDims::new(3, 1).unwrap();
    let n = 100_000;
    let trad = evaluate_quantizer(dims, SchemeId::Traditional, n, 0xD15C).unwrap();
    let prop = evaluate_quantizer(dims, SchemeId::Proposed, n, 0xD15C).unwrap();
    let dt = t0.elapsed();
    assert!(
        (trad.mse - 0.110).abs() <= 0.005,
        "traditional MSE {:.4} vs 0.110 +/- 0.005",
        trad.mse
    );
    assert!(
        (trad.mad - 0.312).abs() <= 0.005,
        "traditional MAD {:.4} vs 0.312 +/- 0.005",
        trad.mad
    );
    assert!(
        (prop.mse - 0.092).abs() <= 0.005,
        "proposed MSE {:.4} vs 0.092 +/- 0.005",
        prop.mse
    );
    assert!(
        (prop.mad - 0.282).abs() <= 0.005,
        "proposed MAD {:.4} vs 0.282 +/- 0.005",
        prop.mad
    );
    assert!((trad.avg_bits - 8.0).abs() < 1e-12);
    assert!(
        dt.as_secs_f64() < 60.0,
        "distortion reproduction took {dt:?}"
    );
    pass(
        3,
        &format!(
            "traditional mse/mad {:.4}/{:.4}, proposed {:.4}/{:.4} ({n} channels, {dt:?})",
            trad.mse, trad.mad, prop.mse, prop.mad
        ),
    );
}

#[test]
fn acceptance_04_psi_statistics_and_code_tables() {
    let dims = GrDims::new(3, 2).unwrap();
    let grid = beamquant_core::quantizer::PsiQuantizer::Grid(UniformGrid::psi(2).unwrap());
    let probs = estimate_psi_symbol_probs(dims, &grid, 100_000, 0xBEE5).unwrap();
    // Canonical rotation order: psi21, psi31, psi32.
    for (a, reference) in [
        (0, PSI21_LEVEL_PROBS),
        (1, PSI31_LEVEL_PROBS),
        (2, PSI21_LEVEL_PROBS),
    ] {
        for (lvl, (&got, &want)) in probs[a].iter().zip(&reference).enumerate() {
            assert!(
                (got - want).abs() <= 0.02,
                "angle {a} level {lvl}: {got:.4} vs {want:.4} +/- 0.02"
            );
        }
    }

    // The two middle-column rotation angles share a distribution, and the
    // bottom-row angle peaks at its second level (33.75 degrees).
    for lvl in 0..4 {
        assert!(
            (probs[0][lvl] - probs[2][lvl]).abs() <= 0.02,
            "psi21 vs psi32 level {lvl}: {} vs {}",
            probs[0][lvl],
            probs[2][lvl]
        );
    }
    let argmax = probs[1]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert_eq!(argmax, 1, "psi31 most probable level");

    let sym = build_huffman(&PSI21_LEVEL_PROBS).unwrap();
    assert_eq!(sym.lengths(), vec![3, 1, 2, 3]);
    assert!((sym.average_length() - 1.93862).abs() < 1e-9);
    let asym = build_huffman(&PSI31_LEVEL_PROBS).unwrap();
    assert_eq!(asym.lengths(), vec![2, 1, 3, 3]);
    assert!((asym.average_length() - 1.77284).abs() < 1e-9);
    pass(
        4,
        "quantized-psi probabilities within 0.02; code lengths {3,1,2,3}/{2,1,3,3}",
    );
}

#[test]
fn acceptance_05_entropy_coded_budget() {
    let dims = GrDims::new(3, 2).unwrap();
    let scheme = standard_scheme(SchemeId::E, dims).unwrap();
    let analytic = scheme
        .expected_bits(&scheme_e_reference_distribution())
        .unwrap();
    assert!(
        (analytic - 12.709).abs() <= 5e-4,
        "analytic budget {analytic:.5} vs 12.709"
    );
    let stats = evaluate_quantizer(dims, SchemeId::E, 100_000, 0xE5E5).unwrap();
    assert!(
        (stats.avg_bits - 12.71).abs() <= 0.05,
        "empirical budget {:.4} vs 12.71 +/- 0.05",
        stats.avg_bits
    );
    pass(
        5,
        &format!(
            "analytic {analytic:.4} bits, empirical {:.4} bits",
            stats.avg_bits
        ),
    );
}

#[test]
fn acceptance_06_bitstream_codec() {
    // Exhaustive over both 3x1 schemes.
    let dims1 = GrDims::new(3, 1).unwrap();
    let mut exhaustive = 0usize;
    for id in [SchemeId::Traditional, SchemeId::Proposed] {
        let scheme = standard_scheme(id, dims1).unwrap();
        let cards = scheme.policy().psi_cardinalities();
        for i21 in 0..cards[0] {
            for i31 in 0..cards[1] {
                let phi_bits = scheme.policy().phi_bits_for(&[i21, i31]).unwrap();
                let total = scheme.policy().message_bits(&[i21, i31]).unwrap();
                if id == SchemeId::Proposed {
                    assert!(total == 7 || total == 9, "variable-rate total {total}");
                    assert_eq!(
                        total,
                        2 + phi_bits[0] as u32 + phi_bits[1] as u32,
                        "budget bookkeeping"
                    );
                }
                for p11 in 0..1usize << phi_bits[0] {
                    for p21 in 0..1usize << phi_bits[1] {
                        let q = QuantizedParams::from_indices(
                            dims1,
                            vec![i21, i31],
                            vec![p11, p21],
                            phi_bits.clone(),
                            scheme.psi_quantizer().clone(),
                            total,
                        )
                        .unwrap();
                        let m = encode_message(&q, &scheme).unwrap();
                        assert_eq!(m.bit_len() as u32, total);
                        assert_eq!(decode_message(&m, &scheme).unwrap(), q);
                        exhaustive += 1;
                    }
                }
            }
        }
    }

    // Randomized over the 3x2 schemes, including the entropy-coded one.
    let dims2 = GrDims::new(3, 2).unwrap();
    let schemes: Vec<_> = [SchemeId::B, SchemeId::C, SchemeId::D, SchemeId::E]
        .iter()
        .map(|&id| standard_scheme(id, dims2).unwrap())
        .collect();
    let mut randomized = 0usize;
    for idx in 0..100_000u64 {
        let mut rng = trial_rng(0xC0DEC, idx);
        let scheme = &schemes[(idx % schemes.len() as u64) as usize];
        let w = beamquant_core::codebook::sample_beamformer(dims2, &mut rng);
        let q = scheme.quantize_matrix(&w).unwrap();
        let m = encode_message(&q, scheme).unwrap();
        assert_eq!(m.bit_len() as u32, q.total_bits());
        let back = decode_message(&m, scheme).unwrap();
        assert_eq!(back, q, "roundtrip mismatch for {}", scheme.id());
        randomized += 1;
    }

    // Corruptions: truncation and trailing bits must be rejected.
    let scheme = &schemes[0];
    let w = {
        let mut rng = trial_rng(0xC0DEC, 7);
        beamquant_core::codebook::sample_beamformer(dims2, &mut rng)
    };
    let q = scheme.quantize_matrix(&w).unwrap();
    let m = encode_message(&q, scheme).unwrap();
    let truncated =
        FeedbackMessage::from_parts(dims2, scheme.id(), m.payload().to_vec(), m.bit_len() - 3)
            .unwrap();
    assert!(decode_message(&truncated, scheme).is_err());
    let mut longer = m.payload().to_vec();
    longer.push(0xAA);
    let padded = FeedbackMessage::from_parts(dims2, scheme.id(), longer, m.bit_len() + 5).unwrap();
    assert!(decode_message(&padded, scheme).is_err());

    pass(
        6,
        &format!(
            "codec bit-exact: {exhaustive} exhaustive 3x1 tuples, {randomized} randomized 3x2"
        ),
    );
}

/// Paired-ordering check: `lo` must not exceed `hi` by more than 3 sigma.
fn assert_ordered(lo: &SchemeResult, hi: &SchemeResult, point: usize, stream: usize, k: usize) {
    let a = lo.point(point, stream, k);
    let b = hi.point(point, stream, k);
    assert!(
        a.bit_errors >= 100.0 && b.bit_errors >= 100.0,
        "need >= 100 errors at point {point}: {}={}, {}={}",
        lo.scheme,
        a.bit_errors,
        hi.scheme,
        b.bit_errors
    );
    let slack = 3.0 * (a.sigma().powi(2) + b.sigma().powi(2)).sqrt();
    assert!(
        a.ber() <= b.ber() + slack,
        "{} ber {:.3e} > {} ber {:.3e} + 3sigma {:.1e} at point {point}",
        lo.scheme,
        a.ber(),
        hi.scheme,
        b.ber(),
        slack
    );
}

#[test]
fn acceptance_07_ber_orderings() {
    let t0 = Instant::now();

    // Single-stream QPSK with the parallel receiver, both 8-bit schemes.
    let fig5 = LinkConfig {
        n_t: 3,
        n_r: 3,
        k: 1,
        modulations: vec![Modulation::Qpsk],
        snr_db: vec![0.0, 2.0, 4.0, 6.0],
        schemes: vec![SchemeId::Traditional, SchemeId::Proposed],
        trials: 600_000,
        receiver: Receiver::Parallel,
        seed: 0xF165,
    };
    let r5 = run_campaign(&fig5).unwrap();
    for point in 0..fig5.snr_db.len() {
        assert_ordered(&r5[1], &r5[0], point, 0, 1); // proposed <= traditional
    }

    // Two streams (64QAM + 16QAM) with the MMSE receiver, all schemes.
    let fig6 = LinkConfig {
        n_t: 3,
        n_r: 3,
        k: 2,
        modulations: vec![Modulation::Qam64, Modulation::Qam16],
        snr_db: vec![6.0, 10.0, 14.0, 18.0],
        schemes: vec![
            SchemeId::A,
            SchemeId::B,
            SchemeId::C,
            SchemeId::D,
            SchemeId::E,
        ],
        trials: 50_000,
        receiver: Receiver::Mmse,
        seed: 0xF166,
    };
    let r6 = run_campaign(&fig6).unwrap();
    // Reported feedback budgets: inf, 12, 12, 15, 12.71 +/- 0.05.
    assert!(r6[0].avg_feedback_bits.is_infinite());
    assert_eq!(r6[1].avg_feedback_bits, 12.0);
    assert_eq!(r6[2].avg_feedback_bits, 12.0);
    assert_eq!(r6[3].avg_feedback_bits, 15.0);
    assert!(
        (r6[4].avg_feedback_bits - 12.71).abs() <= 0.05,
        "entropy-coded budget {:.4}",
        r6[4].avg_feedback_bits
    );
    let (a, b, d, e) = (&r6[0], &r6[1], &r6[3], &r6[4]);
    for point in 0..fig6.snr_db.len() {
        assert_ordered(a, d, point, 0, 2);
        assert_ordered(d, e, point, 0, 2);
        assert_ordered(e, b, point, 0, 2);
    }
    // At the top SNR point the entropy-coded scheme sits closer to the
    // 15-bit scheme than to the 12-bit one.
    let top = fig6.snr_db.len() - 1;
    let (be, bd, bb) = (
        e.point(top, 0, 2).ber(),
        d.point(top, 0, 2).ber(),
        b.point(top, 0, 2).ber(),
    );
    assert!(
        (be - bd).abs() < (bb - be).abs(),
        "entropy-coded ber {be:.3e} not closer to {bd:.3e} than to {bb:.3e}"
    );

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 600.0, "ber campaigns took {dt:?}");
    pass(
        7,
        &format!(
            "orderings hold; top-point stream-1 ber: a {:.2e} d {:.2e} e {:.2e} b {:.2e} ({dt:?})",
            a.point(top, 0, 2).ber(),
            bd,
            be,
            bb
        ),
    );
}

#[test]
fn acceptance_08_receiver_matches_scalar_oracle() {
    // Perfect feedback, one QPSK stream: the parallel receiver reduces to
    // a scalar AWGN channel with gain |d1|, whose bit error rate is
    // Q(|d1| * 10^(snr/20)). Compare accumulated Monte Carlo errors with
    // the conditional expectation over the same channel draws.
    fn q_func(x: f64) -> f64 {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    }
    let config = LinkConfig {
        n_t: 3,
        n_r: 3,
        k: 1,
        modulations: vec![Modulation::Qpsk],
        snr_db: vec![0.0, 4.0],
        schemes: vec![SchemeId::A],
        trials: 50_000,
        receiver: Receiver::Parallel,
        seed: 0x08AC,
    };
    for &snr in &config.snr_db {
        let n0 = 10f64.powf(-snr / 10.0);
        let mut measured = 0.0;
        let mut expected = 0.0;
        let mut variance = 0.0;
        for trial in 0..config.trials as u64 {
            let draws = beamquant_core::linksim::draw_trial(&config, trial);
            let out = run_trial(
                &draws.channel,
                None,
                Receiver::Parallel,
                &config.modulations,
                n0,
                &draws.noise_unit,
                &draws.bits,
            )
            .unwrap();
            measured += out.bit_errors[0];
            let d1 = svd(&draws.channel).unwrap().d[0];
            let p = q_func(d1 / n0.sqrt());
            expected += 2.0 * p;
            variance += 2.0 * p * (1.0 - p);
        }
        let sigma = variance.sqrt();
        assert!(
            (measured - expected).abs() <= 3.0 * sigma,
            "snr {snr}: measured {measured} vs expected {expected:.1} +/- {:.1}",
            3.0 * sigma
        );
    }
    pass(
        8,
        "QPSK errors match the per-eigenmode scalar oracle within 3 sigma",
    );
}

#[test]
fn acceptance_09_angle_distribution_shapes() {
    let dims = GrDims::new(3, 2).unwrap();
    let samples = collect_angle_samples(dims, 100_000, 0x97AE).unwrap();

    // Phases are uniform on [0, 2*pi).
    for (a, col) in samples.phi_samples.iter().enumerate() {
        let ks = ks_uniform_statistic(col, TAU);
        assert!(ks < 0.01, "phase {a}: KS statistic {ks:.4}");
    }

    // psi21 and psi32 are symmetric about pi/4: mirrored bins agree
    // within 3 sigma.
    let bins = 16;
    for &a in &[0usize, 2] {
        let h = AngleHistogram::from_samples("psi", FRAC_PI_2, bins, &samples.psi_samples[a]);
        for b in 0..bins / 2 {
            let (x, y) = (h.counts[b] as f64, h.counts[bins - 1 - b] as f64);
            let sigma = (x + y).max(1.0).sqrt();
            assert!(
                (x - y).abs() <= 3.0 * sigma,
                "rotation angle {a}, bins {b}/{}: {x} vs {y}",
                bins - 1 - b
            );
        }
    }

    // psi31 leans low: more mass below pi/4 than above.
    let h31 = AngleHistogram::from_samples("psi31", FRAC_PI_2, bins, &samples.psi_samples[1]);
    let imbalance = h31.mass_imbalance(FRAC_PI_4);
    assert!(imbalance > 0.3, "psi31 low-side excess {imbalance:.3}");
    pass(
        9,
        &format!("phases uniform, psi21/psi32 symmetric, psi31 low-heavy ({imbalance:.2})"),
    );
}

#[test]
fn acceptance_10_lloyd_training() {
    let dims = GrDims::new(3, 1).unwrap();
    let samples = collect_angle_samples(dims, 100_000, 0x110D).unwrap();
    // Canonical rotation order for 3x1 is psi21 then psi31.
    let psi21 = &samples.psi_samples[0];
    let cb = lloyd_train_psi(psi21, 2, 1).unwrap();
    for w in cb.trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "distortion rose {} -> {}", w[0], w[1]);
    }
    println!(
        "[info] criterion 10: Lloyd distortion non-increasing over {} iterations",
        cb.trace.len()
    );
    for (got, want) in cb.levels.iter().zip(&REFERENCE_PSI_CODEBOOK) {
        assert!(
            (got - want).abs() <= 0.03,
            "trained level {got:.4} vs shipped {want:.4} +/- 0.03 (full codebook {:?}; \
             squared-angle-error training over eigen-beamformer rotation samples converges \
             here for every seed and sample size)",
            cb.levels
        );
    }
    pass(
        10,
        &format!(
            "k=2 codebook {:?} within 0.03 of {REFERENCE_PSI_CODEBOOK:?}",
            cb.levels
        ),
    );
}
