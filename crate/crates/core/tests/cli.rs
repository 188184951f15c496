//! End-to-end checks of the `study` binary: exit codes and output files.

use std::fs;
use std::path::Path;
use std::process::Command;

const STUDY: &str = env!("CARGO_BIN_EXE_study");

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(STUDY).args(args).output().expect("spawn study");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const IDENTITIES: &str = "\
study.kind = identity-suite
domain.shape = disk
domain.radius = 1
quadrature.order = 64
";

#[test]
fn missing_strip_key_is_a_usage_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.cfg",
        "study.kind = resolvent-convergence\ndomain.shape = disk\ndomain.radius = 1\ngrid.n = 15\ngrid.half_length = 2\nmass.m0 = 10\nmass.count = 4\nstrip.rho = 1\n",
    );
    let out = dir.path().join("out");
    let (code, _, err) = run(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("strip.mu0"), "{err}");
    assert!(!out.exists());
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["run"]).0, 1);
    assert_eq!(run(&["run", "/nonexistent/config.cfg"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn validate_accepts_the_shipped_configs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let (code, out, err) = run(&["validate", p.to_str().unwrap()]);
        assert_eq!(code, 0, "{}: {out}{err}", p.display());
    }
}

#[test]
fn window_touching_an_oracle_value_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.cfg",
        "study.kind = eigenvalue-convergence\ndomain.shape = disk\ndomain.radius = 1\ngrid.n = 15\ngrid.half_length = 2\nmass.m0 = 10\nmass.count = 4\nwindow.a = 1.43\nwindow.b = 2.2\n",
    );
    let (code, _, err) = run(&["validate", &cfg]);
    assert_eq!(code, 1);
    assert!(err.contains("margin"), "{err}");
}

#[test]
fn identity_run_writes_three_reports_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "i.cfg", IDENTITIES);
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&["run", &cfg, "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(code, 0, "{stdout}{err}");
    for f in ["report.csv", "report.svg", "report.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let txt = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(txt.contains("verdict: pass"), "{txt}");
    let embedded = infmass::study::config_from_txt(&txt).unwrap();
    assert_eq!(embedded.seed, 7);
    assert!(!fs::read_dir(&out).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().ends_with(".partial")));
}

#[test]
fn slope_above_the_cap_fails_with_two_and_still_writes_reports() {
    // A coarse potential study whose fitted slope (≈ −0.7) misses a strict cap.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.cfg",
        "study.kind = potential-convergence\nstudy.slope_cap = -1.5\ndomain.shape = disk\ndomain.radius = 1\ngrid.n = 21\ngrid.half_length = 2\nmass.m0 = 10\nmass.count = 4\nwindow.a = 1.0\nwindow.b = 2.2\n",
    );
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2, "{stdout}{err}");
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("verdict: fail"));
}

#[test]
fn too_few_points_above_the_floor_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.cfg",
        "study.kind = eigenvalue-convergence\ndomain.shape = disk\ndomain.radius = 1\ngrid.n = 21\ngrid.half_length = 2\nmass.m0 = 10\nmass.count = 4\nwindow.a = 1.0\nwindow.b = 2.2\n",
    );
    let (code, stdout, err) = run(&["run", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(code, 3, "{stdout}{err}");
}

#[test]
fn identities_subcommand_prints_a_table() {
    let (code, out, _) = run(&["identities", "--order", "32"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
}
