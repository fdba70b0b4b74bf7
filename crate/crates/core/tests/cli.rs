use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use finsler_metrize::metrizability::Verdict;
use finsler_metrize::report::{Outcome, Report};

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "fixtures", &format!("{name}.toml")].iter().collect()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler-metrize")).args(args).output().expect("binary runs")
}

fn run_config(cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn report(out: &Output) -> Report {
    Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).expect("stdout is a report")
}

#[test]
fn decide_exit_codes_follow_the_verdict() {
    let ok = run_config("decide", &fixture("translational-case-i"), &[]);
    assert_eq!(ok.status.code(), Some(0));
    let r = report(&ok);
    assert_eq!(r.decide.unwrap().verdict, Verdict::GeneralizedMetrizable);
    assert_eq!(r.outcome, Outcome::Success);

    let neg = run_config("decide", &fixture("negative-control"), &[]);
    assert_eq!(neg.status.code(), Some(2));
    assert_eq!(report(&neg).decide.unwrap().verdict, Verdict::NotMetrizableByTheseFamilies);
}

#[test]
fn classify_reports_subfamilies() {
    let out = run_config("classify", &fixture("schrodinger-radial"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.subfamilies.len(), 1);
    assert_eq!(r.subfamilies[0].constraint, "c1 + 2 c2 = 0, c3 = 0");
    assert!(r.decide.is_none());
}

#[test]
fn verify_passes_on_the_metrizable_fixture_and_fails_when_perturbed() {
    let ok = run_config("verify", &fixture("translational-case-i"), &[]);
    assert_eq!(ok.status.code(), Some(0));
    let v = report(&ok).verify.unwrap();
    assert_eq!(v.source, "decide");
    assert!(v.result.passed);

    let bad = run_config("verify", &fixture("translational-perturbed"), &[]);
    assert_eq!(bad.status.code(), Some(2));
    let v = report(&bad).verify.unwrap();
    assert_eq!(v.c1, 0.05);
    assert!(!v.result.passed);
}

#[test]
fn decide_is_byte_identical_across_processes() {
    let cfg = fixture("schrodinger-radial");
    let a = run_config("decide", &cfg, &[]);
    let b = run_config("decide", &cfg, &[]);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_and_tolerance_overrides_are_applied() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = run_config(
        "decide",
        &fixture("weyl-null"),
        &["--seed", "99", "--tolerance", "fit_residual=1e-9", "--out", out_path.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let r = Report::from_json(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r.seed, 99);
    assert_eq!(r.scenario.tolerances.fit_residual, 1e-9);

    let bad = run_config("decide", &fixture("weyl-null"), &["--tolerance", "nonsense=1"]);
    assert_eq!(bad.status.code(), Some(1));
    let bad = run_config("decide", &fixture("weyl-null"), &["--tolerance", "fit_residual"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn unknown_metric_family_lists_the_available_ones() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("weyl-null")).unwrap().replace("\"minkowski\"", "\"kerr\"");
    let p = dir.path().join("kerr.toml");
    std::fs::write(&p, text).unwrap();
    let out = run_config("decide", &p, &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("kerr") && err.contains("euclidean") && err.contains("conformal-flat"), "{err}");
}

#[test]
fn missing_config_file_is_an_error() {
    let out = run(&["classify", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn integrate_writes_trajectory_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("translational-case-i")).unwrap()
        + "\n[integrate]\nkind = \"both\"\nstep = 1e-3\nsteps = 200\ncount = 2\n";
    let p = dir.path().join("t.toml");
    std::fs::write(&p, text).unwrap();
    let csv = dir.path().join("csv");
    let out = run_config("integrate", &p, &["--csv-dir", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let sec = r.integrate.unwrap();
    assert_eq!(sec.trajectories.len(), 4);
    assert!(sec.order.unwrap().order > 3.5);
    for t in &sec.trajectories {
        assert_eq!(t.states, 201);
        let body = std::fs::read_to_string(csv.join(t.csv.as_ref().unwrap())).unwrap();
        assert_eq!(body.lines().count(), 202);
        assert!(body.starts_with("s,x0,x1,x2,x3,v0,v1,v2,v3\n"));
    }
    assert!(csv.join("translational-case-i-1-geodesic.csv").exists());
}

#[test]
fn integrate_with_zero_steps_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("weyl-null")).unwrap() + "\n[integrate]\nsteps = 0\n";
    let p = dir.path().join("z.toml");
    std::fs::write(&p, text).unwrap();
    let out = run_config("integrate", &p, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("integrate.steps"));
}

#[test]
fn report_round_trips_through_json() {
    let out = run_config("decide", &fixture("translational-case-i"), &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    let r = Report::from_json(&text).unwrap();
    assert_eq!(r.to_json(), text);
}
