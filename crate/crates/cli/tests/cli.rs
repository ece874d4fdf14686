//! End-to-end tests of the `overtake` binary: every emitted document must
//! round-trip through the library's own parsers, and exit codes must follow
//! the 0 = done, 1 = failure, 2 = usage contract.

use overtake::casebook::{self, claims_from_json};
use overtake::evaluate::{reach_curve, ReachCurve, Verdict, VerdictKind};
use overtake::horizon::HorizonCertificate;
use overtake::mdp::{Mdp, Objective};
use overtake::spectral::SpectralReport;
use overtake::strategy::StationaryStrategy;
use serde_json::Value;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overtake"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn dir(test: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("overtake-cli-{}-{test}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d
}

fn put(d: &PathBuf, name: &str, text: String) -> String {
    let p = d.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("not killed by signal")
}

fn example1() -> Mdp {
    casebook::build_example1(0.1, 0.11).unwrap().0
}

fn pure(mdp: &Mdp, x_action: &str) -> StationaryStrategy {
    StationaryStrategy::pure(mdp, &[("x", x_action), ("y", "c"), ("z", "d")]).unwrap()
}

/// Example 1 instance plus strategy files for both routes, written into the
/// given scratch directory.
fn example1_files(d: &PathBuf) -> (Mdp, String, String, String) {
    let mdp = example1();
    let mdp_path = put(d, "mdp.json", format!("{}\n", mdp.to_json()));
    let a_path = put(d, "a.json", format!("{}\n", pure(&mdp, "a").to_json(&mdp)));
    let b_path = put(d, "b.json", format!("{}\n", pure(&mdp, "b").to_json(&mdp)));
    (mdp, mdp_path, a_path, b_path)
}

#[test]
fn validate_accepts_a_sound_instance() {
    let d = dir("validate-ok");
    let (_, mdp_path, _, _) = example1_files(&d);
    let out = run(&["validate", &mdp_path]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["ok"], Value::Bool(true));
    assert_eq!(report["determinism"], Value::Bool(true));
    assert_eq!(report["positivity"], Value::Bool(false));
}

#[test]
fn validate_rejects_a_deficient_row_and_names_the_file() {
    let d = dir("validate-bad");
    let bad = put(
        &d,
        "bad.json",
        r#"{"states":["x","s*"],"target":"s*","objective":"reach",
            "kernel":{"x":{"a":{"x":0.4,"s*":0.5}}}}"#
            .into(),
    );
    let out = run(&["validate", &bad]);
    assert_eq!(code(&out), 1);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["ok"], Value::Bool(false));
    let err = stderr(&out);
    assert!(err.contains(&bad), "stderr: {err}");
    assert!(err.contains("row sums to"), "stderr: {err}");
}

#[test]
fn curve_csv_round_trips_exactly() {
    let d = dir("curve");
    let (mdp, mdp_path, a_path, _) = example1_files(&d);
    let out = run(&[
        "curve", &mdp_path, "--strategy", &a_path, "--from", "x", "--horizon", "40",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let parsed = ReachCurve::values_from_csv(&stdout(&out)).unwrap();
    let expected = reach_curve(&mdp, &pure(&mdp, "a"), 0, 40).unwrap();
    assert_eq!(parsed, expected.values);
}

#[test]
fn compare_reports_overtaking_and_its_safety_flip() {
    let d = dir("compare");
    let (_, mdp_path, a_path, b_path) = example1_files(&d);
    let base = [
        "compare", &mdp_path, "--a", &a_path, "--b", &b_path, "--from", "x", "--window",
        "60:120",
    ];
    let out = run(&base);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let verdict: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let verdict = Verdict::from_json(&verdict).unwrap();
    assert_eq!(verdict.kind, VerdictKind::Overtakes);
    assert_eq!(verdict.window, (60, 120));
    assert_eq!(verdict.strict_above.len(), 61);

    let mut flipped = base.to_vec();
    flipped.extend(["--objective", "safety"]);
    let out = run(&flipped);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let verdict: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let verdict = Verdict::from_json(&verdict).unwrap();
    assert_eq!(verdict.kind, VerdictKind::Overtaken);
}

#[test]
fn spectral_csv_round_trips_and_selects_the_low_root() {
    let d = dir("spectral");
    let (_, mdp_path, _, _) = example1_files(&d);
    let out = run(&["spectral", &mdp_path]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report = SpectralReport::from_csv(&stdout(&out)).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!((report.rows[0].lambda2 - 0.89).abs() <= 1e-12);
    assert!((report.rows[1].lambda2 - 0.90).abs() <= 1e-12);
    assert_eq!(report.selected, 0);
    assert!(report.generic);
}

#[test]
fn best_picks_the_fast_decay_route() {
    let d = dir("best");
    let (mdp, mdp_path, _, _) = example1_files(&d);
    let out = run(&["best", &mdp_path]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let payload: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((payload["lambda2"].as_f64().unwrap() - 0.89).abs() <= 1e-12);
    let sigma = StationaryStrategy::from_json(&mdp, &payload["strategy"]).unwrap();
    assert_eq!(sigma, pure(&mdp, "a"));
}

#[test]
fn horizon_certificate_round_trips_verified() {
    let d = dir("horizon");
    let (_, mdp_path, a_path, b_path) = example1_files(&d);
    let out = run(&["horizon", &mdp_path, "--a", &a_path, "--b", &b_path]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let cert: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let cert = HorizonCertificate::from_json(&cert).unwrap();
    assert!(cert.verified);
    assert!(cert.t_certified >= 54);
    assert!((cert.lambda2_pair.0 - 0.89).abs() <= 1e-12);
    assert!((cert.lambda2_pair.1 - 0.90).abs() <= 1e-12);
}

#[test]
fn blackwell_returns_the_overtaking_route() {
    let d = dir("blackwell");
    let (mdp, mdp_path, _, _) = example1_files(&d);
    let out = run(&["blackwell", &mdp_path]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let sigma: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let sigma = StationaryStrategy::from_json(&mdp, &sigma).unwrap();
    assert_eq!(sigma, pure(&mdp, "a"));
}

#[test]
fn casebook_reports_every_claim_passing() {
    let d = dir("casebook");
    let out_path = d.join("claims.json");
    let out = run(&[
        "casebook", "--horizon", "300", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = fs::read_to_string(&out_path).unwrap();
    let claims = claims_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(claims.len(), 8);
    for claim in &claims {
        assert!(claim.passed, "claim {} failed: {}", claim.id, claim.evidence);
    }
}

#[test]
fn sample_is_seed_deterministic() {
    let first = run(&["sample", "--states", "4", "--actions", "2", "--seed", "11"]);
    let second = run(&["sample", "--states", "4", "--actions", "2", "--seed", "11"]);
    let other = run(&["sample", "--states", "4", "--actions", "2", "--seed", "12"]);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert_ne!(first.stdout, other.stdout);
    let mdp = Mdp::from_json_str(&stdout(&first)).unwrap();
    let report = mdp.validate();
    assert!(report.ok && report.positivity);
    assert_eq!(mdp.objective(), Objective::Reach);
}

#[test]
fn missing_file_fails_with_the_path_named() {
    let out = run(&["validate", "/no/such/instance.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("/no/such/instance.json"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["casebook", "--no-such-flag"]);
    assert_eq!(code(&out), 2);
}
