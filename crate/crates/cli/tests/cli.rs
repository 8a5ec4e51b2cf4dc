use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use frobmod::instances::{InstanceKind, InstanceSpec};
use frobmod_cli::commands::{self, SuiteOptions};
use frobmod_cli::pipeline::Options;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn frobmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobmod")).args(args).env_remove("FROBMOD_SEED").output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn check_names(report: &Value) -> Vec<String> {
    report["instances"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|i| i["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn verify_passes_on_valid_fixtures() {
    for name in ["trivial.json", "matrix_trace_2.json", "branched_grid_1.json", "s3_over_z3.json"] {
        let out = frobmod(&["verify", fixture(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let r = report(&out);
        assert_eq!(r["pass"], true);
        assert_eq!(r["command"], "verify");
    }
}

#[test]
fn verify_names_the_failure_and_exits_1() {
    let out = frobmod(&["verify", fixture("negated_gram.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["pass"], false);
    let error = r["instances"][0]["checks"][0]["error"].as_str().unwrap();
    assert!(error.starts_with("NotPositive"), "{error}");
}

#[test]
fn unreadable_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ \"schema_version\": 1,").unwrap();
    for path in [broken.as_path(), dir.path().join("missing.json").as_path()] {
        let out = frobmod(&["verify", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("ParseError"));
    }
    let out = frobmod(&["roundtrip", fixture("trivial.json").to_str().unwrap(), "--mode", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn roundtrip_modes_report_their_checks() {
    let grid = fixture("branched_grid_1.json");
    let expected: [(&str, &[&str]); 3] = [
        ("frob", &["psi_multiplicative", "psi_star", "psi_unit", "psi_bimodule", "psi_eps"]),
        ("ladj", &["roundtrip_ladj"]),
        ("iso3", &["iso3_forward", "iso3_recovered"]),
    ];
    for (mode, names) in expected {
        let out = frobmod(&["roundtrip", grid.to_str().unwrap(), "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}");
        let r = report(&out);
        assert_eq!(r["pass"], true);
        assert_eq!(check_names(&r), names.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    }
}

#[test]
fn fixtures_match_the_generator() {
    let cases = [
        ("trivial", "", "trivial.json"),
        ("matrix_trace", "n=2,lambda=1", "matrix_trace_2.json"),
        ("branched_grid", "m=1", "branched_grid_1.json"),
        ("group_inclusion", "group=s3,subgroup=0:1:2", "s3_over_z3.json"),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (kind, params, file) in cases {
        let out_path = dir.path().join(file);
        let out = frobmod(&["generate", "--kind", kind, "--params", params, "--out", out_path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{kind}");
        assert_eq!(std::fs::read_to_string(&out_path).unwrap(), std::fs::read_to_string(fixture(file)).unwrap(), "{file}");
    }
}

#[test]
fn generated_random_instance_verifies() {
    let out = frobmod(&["generate", "--kind", "random", "--params", "{\"budget\": 4}", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("random.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let verified = frobmod(&["verify", path.to_str().unwrap()]);
    assert_eq!(verified.status.code(), Some(0));
    assert_eq!(report(&verified)["instances"][0]["id"], "random_b4_s7");

    let bad = frobmod(&["generate", "--kind", "matrix_trace", "--params", "n=0"]);
    assert_eq!(bad.status.code(), Some(2));
    let unknown = frobmod(&["generate", "--kind", "hexagon"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn suite_fails_exactly_the_corrupted_instances() {
    let suite = SuiteOptions { seeds: 3, budget: 4, corrupt_rate: 0.5 };
    let opts = Options { levels: 1, samples: 20, ..Options::default() };
    let mut specs = commands::curated_specs();
    specs.extend((0..3).map(|seed| InstanceSpec { kind: InstanceKind::Random { budget: 4 }, seed }));
    let mask = commands::corruption_mask(specs.len(), suite.corrupt_rate, opts.seed);
    let corrupted: BTreeSet<String> = specs.iter().zip(&mask).filter(|(_, &m)| m).map(|(s, _)| s.id()).collect();
    assert!(!corrupted.is_empty() && corrupted.len() < specs.len());

    let r = commands::cmd_suite(&suite, &opts).unwrap();
    let failed: BTreeSet<String> = r.instances.iter().filter(|i| !i.pass).map(|i| i.id.clone()).collect();
    assert_eq!(failed, corrupted);
    for inst in r.instances.iter().filter(|i| !i.pass) {
        let check = inst.check("c_epsilon_module").expect("corrupted module is reported");
        assert!(check.error.as_deref().unwrap().starts_with("NotPositive"));
    }
    assert_eq!(commands::exit_code(&Ok(r)), 1);
}

#[test]
fn suite_output_is_deterministic_apart_from_timings() {
    let run = || {
        let out = frobmod(&["suite", "--seeds", "2", "--budget", "4", "--levels", "1", "--samples", "20"]);
        assert_eq!(out.status.code(), Some(0));
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("timings_ms");
        r
    };
    assert_eq!(run(), run());
}
