//! End-to-end checks of the `beamquant` binary: exit statuses, codec
//! roundtrips through real files, and CSV determinism.

use std::path::Path;
use std::process::{Command, Output};

fn beamquant(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamquant"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn encode_decode_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("w.txt");
    // 2x1 axis vector: all angles zero, lowest-index codewords.
    std::fs::write(&matrix, "1+0i\n0+0i\n").unwrap();

    let enc = beamquant(&["encode", "w.txt", "--scheme", "fixed:4:4"], dir.path());
    assert!(enc.status.success(), "{}", stderr(&enc));
    let text = stdout(&enc);
    assert!(text.contains("bits: 8"), "{text}");
    assert!(text.contains("payload_hex: 00"), "{text}");

    let hex = text
        .lines()
        .find_map(|l| l.strip_prefix("payload_hex: "))
        .unwrap()
        .to_string();
    let dec = beamquant(
        &[
            "decode",
            &hex,
            "--scheme",
            "fixed:4:4",
            "--dims",
            "2x1",
            "--bits",
            "8",
        ],
        dir.path(),
    );
    assert!(dec.status.success(), "{}", stderr(&dec));
    let dtext = stdout(&dec);
    assert!(dtext.contains("rotation_indices: [0]"), "{dtext}");
    assert!(dtext.contains("phase_indices: [0]"), "{dtext}");
}

#[test]
fn encode_identity_columns_scheme_b() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("w.txt");
    std::fs::write(&matrix, "1 0\n0 1\n0 0\n").unwrap();
    let enc = beamquant(&["encode", "w.txt", "--scheme", "b"], dir.path());
    assert!(enc.status.success(), "{}", stderr(&enc));
    let text = stdout(&enc);
    assert!(text.contains("bits: 12"), "{text}");
    // All-zero angles land on the lowest grid levels (every angle at
    // pi/8). Evaluating the factor product there by hand gives the
    // quantization floor 1.319285594457.
    let mse: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("reconstruction_mse: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mse - 1.319285594457).abs() < 1e-9, "floor mse {mse}");
}

#[test]
fn garbage_matrix_fails_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("w.txt"), "not a matrix\n").unwrap();
    let out = beamquant(&["encode", "w.txt", "--scheme", "b"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn non_unitary_matrix_reports_gram_residual() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("w.txt"), "1 0\n1 1\n0 0\n").unwrap();
    let out = beamquant(&["encode", "w.txt", "--scheme", "b"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Gram residual"), "{}", stderr(&out));
}

#[test]
fn unknown_ids_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamquant(&["reproduce", "table9"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    std::fs::write(dir.path().join("w.txt"), "1+0i\n0+0i\n").unwrap();
    let out = beamquant(&["encode", "w.txt", "--scheme", "zz"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    // Scheme a has nothing to encode.
    let out = beamquant(&["encode", "w.txt", "--scheme", "a"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decode_rejects_corrupt_payloads() {
    let dir = tempfile::tempdir().unwrap();
    // 12-bit scheme-b message truncated to one byte.
    let out = beamquant(
        &[
            "decode", "00", "--scheme", "b", "--dims", "3x2", "--bits", "12",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));

    // Nonzero padding bits after the message.
    let out = beamquant(
        &["decode", "000f", "--scheme", "b", "--dims", "3x2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("padding"), "{}", stderr(&out));

    // Clean byte-padded payload decodes without --bits.
    let out = beamquant(
        &["decode", "0000", "--scheme", "b", "--dims", "3x2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn reproduce_table6_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamquant(&["reproduce", "table6", "--out", "results"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("results/table6.csv")).unwrap();
    assert!(csv.starts_with("level_deg,probability,codeword,bits"));
    assert!(csv.contains("33.75,0.35496,0,1"), "{csv}");
}

#[test]
fn reproduce_table5_and_table8_pass_at_reduced_scale() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamquant(
        &["reproduce", "table5", "--trials", "20000", "--out", "r"],
        dir.path(),
    );
    assert!(out.status.success(), "{}\n{}", stdout(&out), stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("r/table5.csv")).unwrap();
    assert!(csv.contains("traditional"), "{csv}");
    assert!(csv.contains("proposed"), "{csv}");

    let out = beamquant(
        &["reproduce", "table8", "--trials", "10000", "--out", "r"],
        dir.path(),
    );
    assert!(out.status.success(), "{}\n{}", stdout(&out), stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("r/table8.csv")).unwrap();
    assert!(csv.contains("a,inf,inf"), "{csv}");
    assert!(csv.contains("d,15.0000,15"), "{csv}");
}

#[test]
fn reproduce_fig4_writes_nine_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamquant(
        &["reproduce", "fig4", "--trials", "30000", "--out", "r"],
        dir.path(),
    );
    assert!(out.status.success(), "{}\n{}", stdout(&out), stderr(&out));
    for name in [
        "fig4_phi11.csv",
        "fig4_phi21.csv",
        "fig4_phi22.csv",
        "fig4_psi21.csv",
        "fig4_psi31.csv",
        "fig4_psi32.csv",
        "fig4_psi21_quantized.csv",
        "fig4_psi31_quantized.csv",
        "fig4_psi32_quantized.csv",
    ] {
        assert!(dir.path().join("r").join(name).exists(), "{name} missing");
    }
}

#[test]
fn train_rejects_small_sample_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamquant(
        &[
            "train",
            "--dims",
            "3x1",
            "--levels",
            "2",
            "--samples",
            "500",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn train_writes_codebook_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamquant(
        &[
            "train",
            "--dims",
            "3x1",
            "--levels",
            "2",
            "--samples",
            "10000",
            "--seed",
            "3",
            "--out",
            "results",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("results/codebook_3x1.csv")).unwrap();
    assert!(csv.starts_with("param,level_index,level_rad,probability,codeword_bits"));
    assert!(csv.contains("psi21,0,"), "{csv}");
    assert!(csv.contains("psi31,1,"), "{csv}");
}

#[test]
fn campaign_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("camp.toml"),
        r#"
name = "smoke"
n_t = 3
n_r = 3
k = 1
modulations = ["qpsk"]
snr_db = [0.0, 4.0]
schemes = ["a", "traditional"]
trials = 2000
receiver = "parallel"
seed = 5
"#,
    )
    .unwrap();
    let out1 = beamquant(&["campaign", "camp.toml", "--out", "r1"], dir.path());
    assert!(out1.status.success(), "{}", stderr(&out1));
    let out2 = beamquant(&["campaign", "camp.toml", "--out", "r2"], dir.path());
    assert!(out2.status.success());
    let csv1 = std::fs::read_to_string(dir.path().join("r1/campaign_smoke.csv")).unwrap();
    let csv2 = std::fs::read_to_string(dir.path().join("r2/campaign_smoke.csv")).unwrap();
    assert_eq!(csv1, csv2, "campaign output must be byte-identical");
    assert!(csv1.contains("# seed=5"));
    assert!(csv1.contains("scheme,snr_db,stream"));

    let bad = beamquant(&["campaign", "missing.toml"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
