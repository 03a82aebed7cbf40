//! The codec, training and campaign subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use beamquant_core::codebook::{collect_angle_samples, lloyd_train_psi};
use beamquant_core::cxmat::phase_normalize;
use beamquant_core::entropy::{
    build_huffman, decode_message, decode_message_prefix, encode_message, FeedbackMessage,
};
use beamquant_core::givens::GrDims;
use beamquant_core::linksim::{campaign_csv, run_campaign};
use beamquant_core::num_complex::Complex64;
use beamquant_core::quantizer::{dequantize_gr, UniformGrid};
use beamquant_core::scheme::standard_scheme;
use beamquant_core::{ComplexMatrix, Error, SchemeId};

use crate::config::CampaignConfig;
use crate::matio;
use crate::CliError;

/// Unitarity tolerance for matrices coming from text files.
const INPUT_GRAM_TOL: f64 = 1e-6;

pub fn parse_dims(text: &str) -> Result<GrDims, Error> {
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    if parts.len() == 2 {
        if let (Ok(n_t), Ok(k)) = (parts[0].parse(), parts[1].parse()) {
            return GrDims::new(n_t, k);
        }
    }
    Err(Error::Config(format!(
        "dims must look like 3x2, got {text:?}"
    )))
}

/// Light Gram-Schmidt pass so hand-edited inputs that are unitary only to
/// 1e-6 still decompose cleanly.
fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..m.cols()).map(|j| m.column(j)).collect();
    for j in 0..cols.len() {
        for prev in 0..j {
            let proj: Complex64 = cols[prev]
                .iter()
                .zip(&cols[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            for i in 0..cols[j].len() {
                let sub = proj * cols[prev][i];
                cols[j][i] -= sub;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| cols[j][i])
}

pub fn cmd_encode(file: &Path, scheme_id: &str) -> Result<bool, CliError> {
    let id: SchemeId = scheme_id.parse().map_err(CliError::usage)?;
    let text = fs::read_to_string(file)
        .map_err(|e| CliError::fail(format!("cannot read {}: {e}", file.display())))?;
    let raw = matio::parse_matrix(&text).map_err(CliError::fail)?;
    let residual = raw.gram_residual();
    if residual > INPUT_GRAM_TOL {
        return Err(CliError::fail(format!(
            "matrix columns are not orthonormal: Gram residual {residual:.3e} exceeds {INPUT_GRAM_TOL:.0e}"
        )));
    }
    let dims = GrDims::new(raw.rows(), raw.cols()).map_err(CliError::fail)?;
    let scheme = standard_scheme(id, dims).map_err(CliError::usage)?;

    let polished = if residual > 1e-12 {
        orthonormalize_columns(&raw)
    } else {
        raw
    };
    let (w_bar, _) = phase_normalize(&polished);
    let q = scheme.quantize_matrix(&w_bar).map_err(CliError::fail)?;
    let message = encode_message(&q, &scheme).map_err(CliError::fail)?;
    let roundtrip = decode_message(&message, &scheme).map_err(CliError::fail)?;
    if roundtrip != q {
        return Err(CliError::fail(
            "internal codec roundtrip mismatch".to_string(),
        ));
    }
    let w_tilde = scheme.reconstruct_matrix(&q).map_err(CliError::fail)?;
    let mse: f64 = (0..w_bar.rows())
        .flat_map(|i| (0..w_bar.cols()).map(move |j| (i, j)))
        .map(|(i, j)| (w_bar.get(i, j) - w_tilde.get(i, j)).norm_sqr())
        .sum();

    println!("dims: {dims}");
    println!("scheme: {id}");
    println!("payload_hex: {}", message.to_hex());
    println!("bits: {}", message.bit_len());
    println!("reconstruction_mse: {mse:.12e}");
    Ok(true)
}

pub fn cmd_decode(
    hex: &str,
    scheme_id: &str,
    dims_text: &str,
    bits: Option<usize>,
) -> Result<bool, CliError> {
    let id: SchemeId = scheme_id.parse().map_err(CliError::usage)?;
    let dims = parse_dims(dims_text).map_err(CliError::usage)?;
    let scheme = standard_scheme(id, dims).map_err(CliError::usage)?;
    let message = FeedbackMessage::from_hex(dims, id, hex, bits).map_err(CliError::fail)?;

    let q = if bits.is_some() {
        decode_message(&message, &scheme).map_err(CliError::fail)?
    } else {
        // Hex dumps are byte padded; accept up to 7 trailing zero bits.
        let (q, consumed) = decode_message_prefix(&message, &scheme).map_err(CliError::fail)?;
        let trailing = message.bit_len() - consumed;
        if trailing >= 8 {
            return Err(CliError::fail(format!(
                "{trailing} trailing bits after the message"
            )));
        }
        for pos in consumed..message.bit_len() {
            let byte = message.payload()[pos / 8];
            if (byte >> (7 - pos % 8)) & 1 == 1 {
                return Err(CliError::fail(
                    "nonzero padding after the message".to_string(),
                ));
            }
        }
        q
    };

    let params = dequantize_gr(&q).map_err(CliError::fail)?;
    let matrix = scheme.reconstruct_matrix(&q).map_err(CliError::fail)?;
    println!("dims: {dims}");
    println!("scheme: {id}");
    println!("rotation_indices: {:?}", q.psi_indices());
    println!("phase_indices: {:?}", q.phi_indices());
    println!("phase_bits: {:?}", q.phi_bits());
    println!("total_bits: {}", q.total_bits());
    println!("rotation_angles_rad: {:?}", params.psi_flat());
    println!("phase_angles_rad: {:?}", params.phi_flat());
    println!("matrix:");
    println!("{}", matio::format_matrix(&matrix));
    Ok(true)
}

pub fn cmd_train(
    dims_text: &str,
    levels: usize,
    samples: usize,
    seed: u64,
    out: &Path,
) -> Result<bool, CliError> {
    let dims = parse_dims(dims_text).map_err(CliError::usage)?;
    if levels == 0 {
        return Err(CliError::usage("levels must be at least 1".to_string()));
    }
    if samples < beamquant_core::codebook::MIN_ESTIMATION_SAMPLES {
        return Err(CliError::usage(format!(
            "training needs at least {} samples, got {samples}",
            beamquant_core::codebook::MIN_ESTIMATION_SAMPLES
        )));
    }
    let angle_samples = collect_angle_samples(dims, samples, seed).map_err(CliError::fail)?;
    let labels = dims.psi_labels();

    let mut csv = String::from("param,level_index,level_rad,probability,codeword_bits\n");
    for (a, label) in labels.iter().enumerate() {
        let cb = lloyd_train_psi(&angle_samples.psi_samples[a], levels, seed ^ a as u64)
            .map_err(CliError::fail)?;
        let code_bits: Vec<u8> = if levels >= 2 && cb.probs.iter().all(|&p| p > 0.0) {
            build_huffman(&normalize(&cb.probs))
                .map(|t| t.lengths())
                .unwrap_or_else(|_| vec![fixed_width(levels); levels])
        } else {
            vec![fixed_width(levels); levels]
        };
        for (i, (&level, &prob)) in cb.levels.iter().zip(&cb.probs).enumerate() {
            csv.push_str(&format!(
                "{label},{i},{level:.10},{prob:.6},{}\n",
                code_bits[i]
            ));
        }
        println!(
            "{label}: levels {:?}  distortion {:.5}",
            cb.levels
                .iter()
                .map(|l| (l * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            cb.distortion
        );
        // Reference point: the mid-rise grid of matching size when one
        // exists. Lloyd fits the data, so it should never do worse.
        if levels.is_power_of_two() {
            let bits = levels.trailing_zeros() as u8;
            if (1..=4).contains(&bits) {
                let grid = UniformGrid::psi(bits).unwrap();
                let grid_dist: f64 = angle_samples.psi_samples[a]
                    .iter()
                    .map(|&x| {
                        let d = x - grid.level(grid.nearest(x));
                        d * d
                    })
                    .sum::<f64>()
                    / angle_samples.psi_samples[a].len() as f64;
                println!(
                    "{label}: uniform {bits}-bit grid distortion {grid_dist:.5} ({})",
                    if cb.distortion <= grid_dist {
                        "codebook wins"
                    } else {
                        "grid wins"
                    }
                );
            }
        }
    }

    fs::create_dir_all(out)
        .map_err(|e| CliError::fail(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(format!("codebook_{}x{}.csv", dims.n_t(), dims.k()));
    fs::write(&path, csv).map_err(|e| CliError::fail(format!("write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(true)
}

fn fixed_width(levels: usize) -> u8 {
    (usize::BITS - (levels - 1).leading_zeros()).max(1) as u8
}

fn normalize(probs: &[f64]) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    probs.iter().map(|p| p / total).collect()
}

pub fn cmd_campaign(config_path: &Path, out_override: Option<PathBuf>) -> Result<bool, CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg = CampaignConfig::from_toml(&text).map_err(CliError::usage)?;
    let link = cfg.to_link_config().map_err(CliError::usage)?;

    let results = run_campaign(&link).map_err(CliError::fail)?;
    let out = out_override
        .or(cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)
        .map_err(|e| CliError::fail(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(format!("campaign_{}.csv", cfg.name));
    fs::write(&path, campaign_csv(&link, &results))
        .map_err(|e| CliError::fail(format!("write {}: {e}", path.display())))?;

    for r in &results {
        let bits = if r.avg_feedback_bits.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.2}", r.avg_feedback_bits)
        };
        let bers: Vec<String> = link
            .snr_db
            .iter()
            .enumerate()
            .map(|(pi, &snr)| format!("{snr}dB:{:.3e}", r.point(pi, 0, link.k).ber()))
            .collect();
        println!(
            "{}: bits {bits}, mse {:.4}, mad {:.4}, stream-1 ber {}",
            r.scheme,
            r.mse,
            r.mad,
            bers.join(" ")
        );
    }
    println!("wrote {}", path.display());
    Ok(true)
}
