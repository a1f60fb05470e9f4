use std::path::Path;
use std::process::{Command, Output};

fn lo1d(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_lo1d"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn empty_verify_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = lo1d(dir.path(), "[verify]\nrandom_states = 0\n", &["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("out/verify/bound_reports.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("bound_id,") || csv.contains("bound_id"));
    let jsonl = std::fs::read_to_string(dir.path().join("out/verify/bound_reports.jsonl")).unwrap();
    assert!(jsonl.is_empty());
    assert!(dir.path().join("out/verify/manifest.json").exists());
}

#[test]
fn unproven_bound_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lo1d(dir.path(), "[verify]\nbounds = [\"rasanen\"]\n", &["verify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not proven"), "{}", stderr(&out));
}

#[test]
fn coulomb_moments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = lo1d(dir.path(), "[moments]\npotentials = [{ family = \"coulomb\" }]\n", &["moments"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("+inf"), "{}", stderr(&out));
}

#[test]
fn unknown_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lo1d(dir.path(), "[verify]\nrandom_state = 3\n", &["verify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explicit_states_verify_and_repeat_byte_for_byte() {
    let config = r#"
        [verify]
        random_states = 3
        potentials = [{ family = "contact" }, { family = "regularized_coulomb", params = { beta = 0.7 } }]
        [[verify.states]]
        n_particles = 2
        symmetry = "antisymmetric"
        family = "gaussian_product"
        params = { centers = [0.0, 1.5], width = 0.7 }
    "#;
    let mut files = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = lo1d(dir.path(), config, &["verify", "--seed", "5"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let read = |name: &str| std::fs::read(dir.path().join("out/verify").join(name)).unwrap();
        files.push((read("bound_reports.csv"), read("bound_reports.jsonl"), read("manifest.json")));
    }
    assert_eq!(files[0], files[1]);
    assert!(files[0].0.len() > 100);
}

#[test]
fn maximal_ratios_stay_below_the_norm() {
    let dir = tempfile::tempdir().unwrap();
    let out = lo1d(dir.path(), "[maximal]\nrandom_profiles = 10\n", &["maximal"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = lo1d_core::report::read_jsonl(&dir.path().join("out/maximal/maximal.jsonl")).unwrap();
    assert_eq!(rows.len(), 10);
    for r in rows {
        match r.get("ratio") {
            Some(lo1d_core::report::Field::Float(x)) => assert!(*x <= 4.0),
            other => panic!("ratio field {other:?}"),
        }
    }
}
