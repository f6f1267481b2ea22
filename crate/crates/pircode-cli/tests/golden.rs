//! Golden-file suite: the paper-derived worked examples run end to end
//! through the binary, with committed inputs and expected outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(args: &[&str]) -> Output {
    let dir = golden_dir();
    let args: Vec<String> = args
        .iter()
        .map(|a| {
            if a.ends_with(".mat") || a.ends_with(".code") || a.ends_with(".cfg") {
                dir.join(a).to_string_lossy().into_owned()
            } else {
                (*a).to_string()
            }
        })
        .collect();
    Command::new(env!("CARGO_BIN_EXE_pircode"))
        .args(&args)
        .output()
        .expect("binary runs")
}

fn expect_golden(args: &[&str], golden: &str) {
    let out = run(args);
    let expected = std::fs::read_to_string(golden_dir().join(golden)).expect("golden file");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout, expected, "args: {args:?}");
    assert!(out.status.success(), "args: {args:?}");
}

fn expect_stdout(args: &[&str], expected: &str) {
    let out = run(args);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout, expected, "args: {args:?}");
    assert!(out.status.success(), "args: {args:?}");
}

#[test]
fn echelon_forms() {
    expect_golden(&["ref", "z6_rows.mat"], "z6_ref.out");
    expect_golden(&["rref", "z6_rows.mat"], "z6_rref.out");
    expect_stdout(&["length", "z6_rows.mat"], "4\n");
    expect_golden(&["rref", "z4_c.mat"], "z4_rref.out");
    expect_golden(&["rref", "z8_rows.mat"], "z8_rref.out");
}

#[test]
fn distances_and_lengths() {
    expect_stdout(&["distance", "z4_m.mat", "z4_n.mat"], "2\n");
    expect_stdout(&["loss-error", "z4_m.mat", "z4_n.mat"], "loss: 1\nerrors: 1\n");
    expect_golden(&["sum", "z4_m.mat", "z4_n.mat"], "z4_sum.out");
    expect_stdout(&["length", "z12_m.mat"], "5\n");
    expect_stdout(&["length", "zi5_ideal.mat"], "1\n");
    expect_stdout(&["distance", "zi5_n.mat", "zi5_v1.mat"], "3\n");
}

#[test]
fn verification_and_membership() {
    let echelon = golden_dir().join("z6_ref.out");
    let out = run(&[&"check-ref", &*echelon.to_string_lossy()]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "YES\n");
    let out = run(&["check-ref", "z6_rows.mat"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("NO:"), "{text}");
    assert!(out.status.success(), "a NO verdict is data, not a failure");

    expect_stdout(&["member", "z6_rows.mat", "4", "1", "2"], "YES 2 1 1\n");
    expect_stdout(&["member", "z6_rows.mat", "1", "0", "0"], "NO\n");
}

#[test]
fn enumeration_and_bounds() {
    expect_golden(&["enumerate", "--ring", "Z12", "--n", "2", "--length", "1"], "z12_enum.out");
    expect_stdout(
        &["bound", "singleton", "--ring", "Z12", "--n", "2", "--k", "2", "--delta", "2"],
        "singleton: 4\n",
    );
    expect_stdout(
        &["bound", "sphere", "--ring", "Z12", "--n", "2", "--k", "2", "--delta", "2"],
        "sphere: 7\n",
    );
    expect_stdout(&["bound", "chain", "--ring", "Z4", "--n", "4", "--k", "4"], "chain: 7\n");
    expect_golden(&["bound", "zpm", "--p", "2", "--m", "2", "--n", "4", "--k", "3"], "z4_zpm.out");
}

#[test]
fn constructions_and_decoding() {
    expect_golden(&["construct", "spread", "--ring", "Z4", "--n", "4", "--k", "4"], "z4_spread.out");
    expect_golden(
        &["construct", "tensor", "z5_code.code", "--target", "Zi5"],
        "zi5_tensor.code",
    );
    expect_golden(
        &["construct", "stacked", "z2_code.code", "z2_code.code"],
        "prod_stacked.code",
    );
    expect_golden(&["decode", "zi5_tensor.code", "zi5_n.mat"], "zi5_decode.out");
    expect_golden(&["decode", "prod_stacked.code", "prod_n.mat"], "prod_decode.out");
    expect_golden(
        &["decode", "--product", "prod_stacked.code", "prod_n.mat"],
        "prod_decode_split.out",
    );
}

#[test]
fn simulation_reports() {
    expect_golden(&["simulate", "--config", "sim_mmc.cfg"], "sim_mmc.out");
    // bit-for-bit reproducible across runs
    expect_golden(&["simulate", "--config", "sim_noisy.cfg"], "sim_noisy.out");
    expect_golden(&["simulate", "--config", "sim_noisy.cfg"], "sim_noisy.out");
    expect_golden(
        &[
            "check-trapping", "--ring", "Z4", "--n", "4", "--big-n", "2", "--t", "1",
            "--u", "1", "--v", "1", "--trials", "2", "--seed", "9",
        ],
        "trapping.out",
    );
}

#[test]
fn machine_format_emits_json() {
    let out = run(&[
        "--format", "machine", "bound", "zpm", "--p", "2", "--m", "2", "--n", "4", "--k", "3",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    let parsed: serde_json::Value = serde_json::from_str(&text).expect("valid JSON");
    assert_eq!(parsed["odd_two_factor"], 7);
    assert_eq!(parsed["tightest"], 7);

    let out = run(&["--format", "machine", "simulate", "--config", "sim_mmc.cfg"]);
    let parsed: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).expect("valid JSON");
    assert_eq!(parsed["success_rate"], 1.0);
}

#[test]
fn exit_codes() {
    // malformed input: exit 2 with a line/column diagnostic
    let out = run(&["rref", "bad_matrix.mat"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    // domain violation: exit 1 with the kernel's message
    let out = run(&["construct", "spread", "--ring", "Z6", "--n", "4", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("chain"), "{err}");

    // verdicts are data: NO from check-ref still exits 0
    let out = run(&["check-ref", "z6_rows.mat"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn printed_matrices_reparse() {
    // round-trip: rref output parses back and reproduces itself
    let out = run(&["rref", "z4_c.mat"]);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let tmp = std::env::temp_dir().join("pircode_roundtrip.mat");
    std::fs::write(&tmp, &text).unwrap();
    let out2 = Command::new(env!("CARGO_BIN_EXE_pircode"))
        .args(["rref", &tmp.to_string_lossy()])
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out2.stdout), text);
}
